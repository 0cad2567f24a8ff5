/** Typed client for the datavalor HTTP API. Every number shown anywhere in
 * the workbench comes from these responses; the client performs no
 * valuation math of its own. */

export interface ErrorBody {
  code: string;
  message: string;
  path: string;
}

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly path: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

export interface QuestionDoc {
  id: string;
  text: string;
  answers: string[];
}

export interface SessionDoc {
  session_id: string;
  tree_id: string;
  answered: [string, string][];
  accumulated_codes: number[];
  current_question_id: string | null;
  status: "in_progress" | "complete";
  question: QuestionDoc | null;
}

export interface EffectsDoc {
  main_driver: string | null;
  cost_only: boolean;
  include_capex: boolean;
  include_opex: boolean;
  include_governance_costs: boolean;
  icf_rule: string | null;
  icf_value: number | null;
  demand_required: boolean;
  demand_zero: boolean;
  distributed: boolean;
  strategy: string | null;
  recommended_metric_ids: string[];
}

export interface RecommendationDoc {
  code: number;
  text: string;
  effects: Partial<EffectsDoc>;
}

export interface RecommendationPanel {
  session_id: string;
  accumulated_codes: number[];
  recommendations: RecommendationDoc[];
  effects: EffectsDoc;
  discrepancy_notes: string[];
  purpose?: string | null;
}

export interface PriorityDoc {
  items: string[];
  weights: number[];
  method: string;
  consistency: ConsistencyDoc;
}

export interface ConsistencyDoc {
  lambda_max: number;
  consistency_index: number;
  consistency_ratio: number;
  acceptable: boolean;
  threshold: number;
}

export interface MetricDoc {
  id: string;
  name: string;
  [extra: string]: unknown;
}

export interface CatalogDoc {
  version: string;
  metrics: MetricDoc[];
}

export type ScenarioDoc = {
  schema: string;
  id: string;
  description: string;
  currency: string;
  driver: string;
  alignment_variant: string;
  paper_compat: boolean;
  weights: Record<string, number>;
  domains: Array<Record<string, unknown>>;
  candidates: Array<Record<string, unknown>>;
  [extra: string]: unknown;
};

export interface ValuationDoc {
  driver: string;
  qru: number;
  v_p: number;
  value: number;
  components: Array<{ component_id: string; val: number; icf: number }>;
  audit: {
    quality: { value: number } | null;
    domains: Array<{ id: string; relevance: number; beta: number }>;
    utility: number | null;
    costs: { total: number };
    discrepancy_notes: string[];
    warnings: string[];
    [extra: string]: unknown;
  };
}

export interface RankedRow {
  candidate_id: string;
  value: number;
  qru: number;
  total_cost: number;
  value_display: string;
}

export interface ComparisonDoc {
  scenario_id: string;
  currency: string;
  ranked: RankedRow[];
  winner: string;
  discrepancy_notes: string[];
}

export interface WhatIfDoc {
  candidate_id: string;
  before: ValuationDoc;
  after: ValuationDoc;
  deltas: Record<string, number | Record<string, number>>;
  overrides: Record<string, unknown>;
}

export interface CatalogFilters {
  perspective?: string;
  cluster?: string;
  keyword?: string;
}

export class DataValorClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    query?: Record<string, string | undefined>,
  ): Promise<T> {
    let url = this.baseUrl + path;
    if (query) {
      const params = new URLSearchParams();
      for (const [key, value] of Object.entries(query)) {
        if (value !== undefined) params.set(key, value);
      }
      const encoded = params.toString();
      if (encoded) url += `?${encoded}`;
    }
    const response = await this.fetchImpl(url, {
      method,
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      const err = payload as ErrorBody;
      throw new ApiRequestError(
        response.status,
        err.code ?? "unknown",
        err.path ?? "",
        err.message ?? response.statusText,
      );
    }
    return payload as T;
  }

  // screening
  startScreening(tree: string | object = "step1"): Promise<SessionDoc> {
    return this.request("POST", "/sessions/screening", { tree });
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  postAnswer(
    sessionId: string,
    questionId: string,
    answer: string,
  ): Promise<SessionDoc> {
    return this.request("POST", `/sessions/${sessionId}/answers`, {
      question_id: questionId,
      answer,
    });
  }

  recommendations(sessionId: string): Promise<RecommendationPanel> {
    return this.request("GET", `/sessions/${sessionId}/recommendations`);
  }

  // catalog
  catalog(filters: CatalogFilters = {}): Promise<CatalogDoc> {
    return this.request("GET", "/catalog", undefined, { ...filters });
  }

  // pairwise judgements
  priorities(
    items: string[],
    matrix: number[][],
    method?: string,
  ): Promise<PriorityDoc> {
    return this.request("POST", "/anp/priorities", { items, matrix, method });
  }

  consistency(
    items: string[],
    matrix: number[][],
    crThreshold?: number,
  ): Promise<ConsistencyDoc> {
    return this.request("POST", "/anp/consistency", {
      items,
      matrix,
      cr_threshold: crThreshold,
    });
  }

  // scenarios
  listScenarios(): Promise<{ scenarios: string[] }> {
    return this.request("GET", "/scenarios");
  }

  createScenario(doc: ScenarioDoc): Promise<{ id: string }> {
    return this.request("POST", "/scenarios", doc);
  }

  getScenario(scenarioId: string): Promise<ScenarioDoc> {
    return this.request("GET", `/scenarios/${scenarioId}`);
  }

  putScenario(scenarioId: string, doc: ScenarioDoc): Promise<{ id: string }> {
    return this.request("PUT", `/scenarios/${scenarioId}`, doc);
  }

  valuation(
    scenarioId: string,
    candidate: string,
    paperCompat?: boolean,
  ): Promise<ValuationDoc> {
    return this.request(
      "POST",
      `/scenarios/${scenarioId}/valuations`,
      undefined,
      {
        candidate,
        paper_compat: paperCompat === undefined ? undefined : String(paperCompat),
      },
    );
  }

  comparison(
    scenarioId: string,
    paperCompat?: boolean,
  ): Promise<ComparisonDoc> {
    return this.request(
      "POST",
      `/scenarios/${scenarioId}/comparison`,
      undefined,
      {
        paper_compat: paperCompat === undefined ? undefined : String(paperCompat),
      },
    );
  }

  whatIf(
    scenarioId: string,
    candidateId: string,
    overrides: Record<string, unknown>,
    paperCompat?: boolean,
  ): Promise<WhatIfDoc> {
    return this.request("POST", `/scenarios/${scenarioId}/what-if`, {
      candidate_id: candidateId,
      overrides,
      paper_compat: paperCompat,
    });
  }
}

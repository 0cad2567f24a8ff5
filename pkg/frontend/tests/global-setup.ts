/**
 * Boot a real datavalor service for the test run.
 *
 * The store directory is seeded with the packaged scenarios so dashboard
 * tests can load them by id, then `datavalor serve` is spawned and polled
 * until it answers. Teardown kills the child and removes the store.
 */

import { type ChildProcess, spawn, spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { BASE_URL, HOST, PORT } from "./config.js";

let server: ChildProcess | null = null;
let storeDir: string | null = null;

function seedStore(dir: string): void {
  const code = [
    "from datavalor import ScenarioStore, packaged_scenario",
    `store = ScenarioStore(${JSON.stringify(dir)})`,
    'store.save(packaged_scenario("example1"))',
    'store.save(packaged_scenario("example2"))',
  ].join("\n");
  const proc = spawnSync("python3", ["-c", code], { stdio: "inherit" });
  if ((proc.status ?? 1) !== 0) {
    throw new Error(`store seeding failed with exit code ${proc.status}`);
  }
}

async function waitForReady(): Promise<void> {
  const deadline = Date.now() + 30_000;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE_URL}/scenarios`);
      if (response.ok) return;
      lastError = new Error(`status ${response.status}`);
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`service did not come up on ${BASE_URL}: ${lastError}`);
}

export async function setup(): Promise<void> {
  storeDir = mkdtempSync(join(tmpdir(), "datavalor-store-"));
  seedStore(storeDir);
  server = spawn(
    "datavalor",
    ["serve", "--addr", `${HOST}:${PORT}`, "--store-dir", storeDir],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stderr?.on("data", () => {});
  server.stdout?.on("data", () => {});
  await waitForReady();
}

export async function teardown(): Promise<void> {
  if (server && server.pid) {
    server.kill("SIGTERM");
    await new Promise((resolve) => setTimeout(resolve, 300));
    if (server.exitCode === null) server.kill("SIGKILL");
  }
  if (storeDir) {
    rmSync(storeDir, { recursive: true, force: true });
  }
}

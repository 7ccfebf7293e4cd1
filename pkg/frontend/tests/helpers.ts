// Test harness: spawns the real control plane (the Python package this
// dashboard fronts) and seeds it over its public HTTP API.

import { spawn, type ChildProcess } from "node:child_process";
import net from "node:net";
import path from "node:path";

export const API_KEY = "dash-api-key";
export const USER_ID = "dash-admin";
export const ORG_KEY = "dash-org-key";

export interface LiveControlPlane {
  url: string;
  stop(): Promise<void>;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = net.createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        server.close(() => reject(new Error("no port")));
      }
    });
  });
}

export async function startControlPlane(): Promise<LiveControlPlane> {
  const port = await freePort();
  const url = `http://127.0.0.1:${port}`;
  const repoRoot = path.resolve(__dirname, "..", "..");
  const proc: ChildProcess = spawn("python3", ["-m", "razorcd.cli", "serve"], {
    cwd: repoRoot,
    env: {
      ...process.env,
      RAZORCD_LISTEN: `127.0.0.1:${port}`,
      RAZORCD_API_KEY: API_KEY,
      RAZORCD_USER_ID: USER_ID,
      RAZORCD_ORG_KEY: ORG_KEY,
      RAZORCD_STORE_DIR: ":memory:",
    },
    stdio: ["ignore", "pipe", "pipe"],
  });
  let output = "";
  proc.stdout?.on("data", (chunk) => (output += String(chunk)));
  proc.stderr?.on("data", (chunk) => (output += String(chunk)));

  const deadline = Date.now() + 15000;
  for (;;) {
    try {
      const response = await fetch(`${url}/api/v1/channels`, {
        headers: { "x-api-key": API_KEY, "x-user-id": USER_ID },
      });
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      proc.kill("SIGTERM");
      throw new Error(`control plane never came up on ${url}\n${output}`);
    }
    await sleep(100);
  }
  return {
    url,
    stop: () =>
      new Promise<void>((resolve) => {
        proc.once("exit", () => resolve());
        proc.kill("SIGTERM");
        setTimeout(() => {
          proc.kill("SIGKILL");
          resolve();
        }, 3000).unref();
      }),
  };
}

export function adminHeaders(): Record<string, string> {
  return { "x-api-key": API_KEY, "x-user-id": USER_ID, "content-type": "application/json" };
}

export async function apiPost(url: string, pathName: string, body: unknown): Promise<unknown> {
  const response = await fetch(url + pathName, {
    method: "POST",
    headers: adminHeaders(),
    body: JSON.stringify(body),
  });
  if (!response.ok) {
    throw new Error(`POST ${pathName} failed: ${await response.text()}`);
  }
  return response.json();
}

export async function apiGet(url: string, pathName: string): Promise<any> {
  const response = await fetch(url + pathName, { headers: adminHeaders() });
  if (!response.ok) {
    throw new Error(`GET ${pathName} failed: ${await response.text()}`);
  }
  return response.json();
}

export function sampleBundle(marker: string): string {
  return [
    "apiVersion: v1",
    "kind: ConfigMap",
    "metadata:",
    "  name: welcome-page",
    "  namespace: web",
    "spec:",
    `  build: ${marker}`,
    "",
  ].join("\n");
}

/** Seed the acceptance flow: channel + version 1.0 + subscription + clusters. */
export async function seedScenario(url: string): Promise<void> {
  await apiPost(url, "/api/v1/channels", { name: "nginx-operator" });
  const upload = await fetch(`${url}/api/v1/channels/nginx-operator/version`, {
    method: "POST",
    headers: {
      "content-type": "text/yaml",
      "razeedash-org-key": ORG_KEY,
      "resource-name": "1.0",
      "x-api-key": API_KEY,
      "x-user-id": USER_ID,
    },
    body: sampleBundle("1.0"),
  });
  if (!upload.ok) {
    throw new Error(`seed upload failed: ${await upload.text()}`);
  }
  await apiPost(url, "/api/v1/subscriptions", {
    name: "nginx-test",
    channel: "nginx-operator",
    version: "1.0",
    tags: ["demo"],
  });
  for (let i = 0; i < 3; i += 1) {
    await registerCluster(url, `cluster-000${i}`, ["demo"]);
  }
  await registerCluster(url, "cluster-0003", ["other"]);
}

export async function registerCluster(url: string, clusterId: string, tags: string[]): Promise<void> {
  const response = await fetch(`${url}/api/v1/clusters/register`, {
    method: "POST",
    headers: { "razeedash-org-key": ORG_KEY, "content-type": "application/json" },
    body: JSON.stringify({ cluster_id: clusterId, tags }),
  });
  if (!response.ok) {
    throw new Error(`register failed: ${await response.text()}`);
  }
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function waitFor(
  check: () => boolean | Promise<boolean>,
  label: string,
  timeoutMs = 10000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    if (await check()) return;
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${label}`);
    }
    await sleep(50);
  }
}

// Browser-level test (jsdom + real HTTP) against a live control plane:
// seeds the operator-channel flow, then drives the pages the way a release
// admin would. Covers: channels page reflecting a second upload, the
// subscription flip issuing the PATCH and reflecting the new version,
// the cluster inventory page, read-path purity, and the alerts flow.

import { afterAll, afterEach, beforeAll, beforeEach, describe, expect, it } from "vitest";

import * as api from "../src/api";
import { startApp, type AppHandle } from "../src/app";
import { clearSession } from "../src/session";
import {
  API_KEY,
  ORG_KEY,
  USER_ID,
  apiGet,
  sampleBundle,
  seedScenario,
  sleep,
  startControlPlane,
  waitFor,
  type LiveControlPlane,
} from "./helpers";

let cp: LiveControlPlane;
let root: HTMLElement;
let app: AppHandle | null = null;
const recorded: api.RecordedRequest[] = [];

beforeAll(async () => {
  cp = await startControlPlane();
  await seedScenario(cp.url);
}, 30000);

afterAll(async () => {
  await cp.stop();
});

beforeEach(() => {
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.append(root);
  recorded.length = 0;
  api.setRequestObserver((request) => recorded.push(request));
});

afterEach(() => {
  app?.stop();
  app = null;
  api.setRequestObserver(null);
  clearSession();
});

function boot(refreshMs = 150): AppHandle {
  app = startApp(root, {
    session: { baseUrl: cp.url, apiKey: API_KEY, userId: USER_ID, orgKey: ORG_KEY },
    refreshMs,
  });
  return app;
}

function versionCountCell(channel: string): string | null {
  const row = root.querySelector(`tr[data-channel="${channel}"]`);
  return row?.querySelector(".version-count")?.textContent ?? null;
}

async function ensureVersion2(): Promise<void> {
  const versions = await apiGet(cp.url, "/api/v1/channels/nginx-operator/versions");
  if (versions.versions.some((v: { name: string }) => v.name === "2.0")) return;
  const response = await fetch(`${cp.url}/api/v1/channels/nginx-operator/version`, {
    method: "POST",
    headers: {
      "content-type": "text/yaml",
      "razeedash-org-key": ORG_KEY,
      "resource-name": "2.0",
      "x-api-key": API_KEY,
      "x-user-id": USER_ID,
    },
    body: sampleBundle("2.0"),
  });
  if (!response.ok) throw new Error(await response.text());
}

describe("channels page", () => {
  it("lists the seeded channel and shows count 2 after uploading through the form", async () => {
    const handle = boot();
    await handle.navigate("channels");
    await waitFor(() => versionCountCell("nginx-operator") === "1", "initial version count");

    const form = root.querySelector("form.upload-version") as HTMLFormElement;
    (form.querySelector('select[name="upload-channel"]') as HTMLSelectElement).value =
      "nginx-operator";
    (form.querySelector('input[name="upload-version"]') as HTMLInputElement).value = "2.0";
    (form.querySelector('textarea[name="upload-bundle"]') as HTMLTextAreaElement).value =
      sampleBundle("2.0");
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));

    await waitFor(() => versionCountCell("nginx-operator") === "2", "version count after upload");
    const upload = recorded.find(
      (r) => r.method === "POST" && r.path === "/api/v1/channels/nginx-operator/version",
    );
    expect(upload).toBeDefined();
    expect(upload!.headers["resource-name"]).toBe("2.0");
    expect(upload!.headers["content-type"]).toBe("text/yaml");
    expect(upload!.headers["razeedash-org-key"]).toBe(ORG_KEY);
  });

  it("shows inline error on duplicate upload, leaving state intact", async () => {
    await ensureVersion2();
    const handle = boot();
    await handle.navigate("channels");
    await waitFor(() => versionCountCell("nginx-operator") === "2", "count 2");

    const form = root.querySelector("form.upload-version") as HTMLFormElement;
    (form.querySelector('input[name="upload-version"]') as HTMLInputElement).value = "2.0";
    (form.querySelector('textarea[name="upload-bundle"]') as HTMLTextAreaElement).value =
      sampleBundle("again");
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await waitFor(
      () => form.querySelector(".error")?.textContent?.includes("version_exists") ?? false,
      "duplicate upload error",
    );
    expect(versionCountCell("nginx-operator")).toBe("2");
  });
});

describe("subscriptions page", () => {
  it("flip control issues the PATCH and reflects 2.0", async () => {
    await ensureVersion2();
    const handle = boot();
    await handle.navigate("subscriptions");
    await waitFor(
      () => root.querySelector('tr[data-sub="nginx-test"]') !== null,
      "subscription row",
    );
    const select = root.querySelector('select.version-flip[data-sub="nginx-test"]') as
      HTMLSelectElement;
    expect(select.value).toBe("1.0");
    expect([...select.options].map((o) => o.value)).toContain("2.0");

    recorded.length = 0;
    select.value = "2.0";
    select.dispatchEvent(new Event("change", { bubbles: true }));

    await waitFor(async () => {
      const subs = await apiGet(cp.url, "/api/v1/subscriptions");
      return subs.subscriptions[0].version === "2.0";
    }, "server version flipped");
    const patch = recorded.find((r) => r.method === "PATCH");
    expect(patch).toBeDefined();
    expect(patch!.path).toMatch(/^\/api\/v1\/subscriptions\/[^/]+\/version$/);
    expect(patch!.bodyKeys).toContain("version");
    await waitFor(() => select.value === "2.0", "row reflects 2.0");
    await waitFor(
      () =>
        root
          .querySelector('tr[data-sub="nginx-test"] td.revision')
          ?.textContent === "2",
      "revision bumped",
    );
  });

  it("selecting the current version issues no PATCH", async () => {
    const handle = boot();
    await handle.navigate("subscriptions");
    await waitFor(() => root.querySelector("select.version-flip") !== null, "row");
    const select = root.querySelector("select.version-flip") as HTMLSelectElement;
    const current = select.value;
    recorded.length = 0;
    select.value = current;
    select.dispatchEvent(new Event("change", { bubbles: true }));
    await sleep(250);
    expect(recorded.filter((r) => r.method === "PATCH")).toEqual([]);
  });

  it("a concurrent external flip shows up on the next poll refresh", async () => {
    await ensureVersion2();
    const handle = boot(60000);
    await handle.navigate("subscriptions");
    await waitFor(() => root.querySelector("select.version-flip") !== null, "row");
    const before = (root.querySelector("select.version-flip") as HTMLSelectElement).value;
    const target = before === "2.0" ? "1.0" : "2.0";

    const subs = await apiGet(cp.url, "/api/v1/subscriptions");
    const response = await fetch(
      `${cp.url}/api/v1/subscriptions/${subs.subscriptions[0].id}/version`,
      {
        method: "PATCH",
        headers: { "x-api-key": API_KEY, "x-user-id": USER_ID, "content-type": "application/json" },
        body: JSON.stringify({ version: target }),
      },
    );
    expect(response.ok).toBe(true);

    await handle.refreshNow();
    await waitFor(
      () => (root.querySelector("select.version-flip") as HTMLSelectElement).value === target,
      "row shows externally flipped version",
    );
  });

  it("failed flip reverts the row and surfaces the error", async () => {
    const handle = boot(60000); // no background refresh during this assertion
    await handle.navigate("subscriptions");
    await waitFor(() => root.querySelector("select.version-flip") !== null, "row");
    const select = root.querySelector("select.version-flip") as HTMLSelectElement;
    const committed = select.value;

    const phantom = document.createElement("option");
    phantom.value = "9.9";
    select.append(phantom);
    select.value = "9.9";
    select.dispatchEvent(new Event("change", { bubbles: true }));

    await waitFor(
      () =>
        root
          .querySelector("td.row-feedback .error")
          ?.textContent?.includes("version_not_found") ?? false,
      "flip error shown",
    );
    expect(select.value).toBe(committed);
  });
});

describe("clusters page", () => {
  it("lists the registered clusters", async () => {
    const handle = boot();
    await handle.navigate("clusters");
    await waitFor(
      () => root.querySelectorAll("tr[data-cluster]").length === 4,
      "4 cluster rows",
    );
    const ids = [...root.querySelectorAll("tr[data-cluster]")].map(
      (row) => row.getAttribute("data-cluster"),
    );
    expect(ids).toEqual(["cluster-0000", "cluster-0001", "cluster-0002", "cluster-0003"]);
  });

  it("lite resource detail shows metadata and status but no spec section", async () => {
    const report = {
      resource_key: {
        apiVersion: "apps/v1",
        kind: "Deployment",
        namespace: "web",
        name: "welcome",
      },
      level: "lite",
      payload: {
        metadata: { name: "welcome", labels: { "razeedash/watch-resource": "lite" } },
        status: { phase: "Running" },
      },
      observed_at: 10,
      trigger: "interval",
    };
    const response = await fetch(`${cp.url}/api/v1/clusters/cluster-0000/reports`, {
      method: "POST",
      headers: { "razeedash-org-key": ORG_KEY, "content-type": "application/json" },
      body: JSON.stringify({ reports: [report], sent_at: 10 }),
    });
    expect(response.ok).toBe(true);

    const handle = boot();
    await handle.navigate("clusters");
    await waitFor(() => root.querySelector('tr[data-cluster="cluster-0000"]') !== null, "rows");
    (root.querySelector('tr[data-cluster="cluster-0000"]') as HTMLElement).click();
    await waitFor(() => root.querySelector("tr[data-resource]") !== null, "resource row");
    (root.querySelector("tr[data-resource]") as HTMLElement).click();
    await waitFor(() => root.querySelector(".resource-panel") !== null, "resource panel");
    const panel = root.querySelector(".resource-panel") as HTMLElement;
    expect(panel.querySelector(".section-metadata")).not.toBeNull();
    expect(panel.querySelector(".section-status")).not.toBeNull();
    expect(panel.querySelector(".section-spec")).toBeNull();
  });
});

describe("alerts page", () => {
  it("creates a stale rule, sees firings and badges, then deletes the rule", async () => {
    const handle = boot();
    await handle.navigate("alerts");
    await waitFor(() => root.querySelector("form.create-rule") !== null, "rule form");

    const form = root.querySelector("form.create-rule") as HTMLFormElement;
    (form.querySelector('input[name="rule-name"]') as HTMLInputElement).value = "stale-clusters";
    (form.querySelector('select[name="rule-type"]') as HTMLSelectElement).value = "cluster_stale";
    (form.querySelector('input[name="rule-max-silence"]') as HTMLInputElement).value = "1";
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await waitFor(() => root.querySelector("tr[data-rule]") !== null, "rule listed");

    await sleep(1200); // let the clusters go silent past max_silence
    await handle.refreshNow();
    await waitFor(
      () => root.querySelectorAll(".firings tr[data-subject]").length >= 4,
      "firings for silent clusters",
    );

    await handle.navigate("clusters");
    await waitFor(() => root.querySelector(".badge.stale") !== null, "stale badge");

    await handle.navigate("alerts");
    await waitFor(() => root.querySelector("button.delete-rule") !== null, "delete button");
    (root.querySelector("button.delete-rule") as HTMLButtonElement).click();
    await waitFor(
      () => root.querySelectorAll(".firings tr[data-subject]").length === 0,
      "firings cleared after rule deletion",
    );
  });
});

describe("read-path purity and session handling", () => {
  it("rendering every page issues only GET requests", async () => {
    const handle = boot(60000);
    for (const page of ["channels", "subscriptions", "clusters", "alerts"] as const) {
      recorded.length = 0;
      await handle.navigate(page);
      const methods = new Set(recorded.map((r) => r.method));
      expect([...methods].every((m) => m === "GET"), `${page}: ${[...methods]}`).toBe(true);
    }
  });

  it("shows the login form without a session and signs in", async () => {
    app = startApp(root, { refreshMs: 60000 });
    await waitFor(() => root.querySelector("form.login") !== null, "login form");
    const form = root.querySelector("form.login") as HTMLFormElement;
    (form.querySelector('input[name="base-url"]') as HTMLInputElement).value = cp.url;
    (form.querySelector('input[name="api-key"]') as HTMLInputElement).value = API_KEY;
    (form.querySelector('input[name="user-id"]') as HTMLInputElement).value = USER_ID;
    (form.querySelector('input[name="org-key"]') as HTMLInputElement).value = ORG_KEY;
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await waitFor(() => root.querySelector("table.data, .empty-state") !== null, "page rendered");
  });
});

// Cluster inventory with staleness badges (driven by server-side alert
// evaluation) and a per-cluster drill-down into reported resources. A lite
// report has no spec section, so its detail view shows no spec tab.

import * as api from "../api";
import { clear, el, errorBox, relativeTime, table } from "../dom";
import type { ResourceReport } from "../types";
import type { ViewHandle } from "./view";

export async function mountClusters(root: HTMLElement): Promise<ViewHandle> {
  clear(root);
  const data = el("div", { class: "data-region" });
  const detail = el("div", { class: "cluster-detail" });
  let selectedCluster: string | null = null;

  async function refresh(): Promise<void> {
    const [clusters, firings] = await Promise.all([api.listClusters(), api.listFirings()]);
    const staleSubjects = new Set(firings.map((f) => f.subject));
    clear(data);
    if (clusters.length === 0) {
      data.append(el("p", { class: "empty-state" }, "No clusters registered."));
    } else {
      const rows = clusters.map((c) => {
        const badge = staleSubjects.has(c.cluster_id)
          ? el("span", { class: "badge stale" }, "stale")
          : null;
        const row = el(
          "tr",
          { "data-cluster": c.cluster_id },
          el("td", {}, c.cluster_id, badge ? " " : "", badge),
          el("td", {}, c.tags.join(",")),
          el("td", { title: String(c.last_seen) }, relativeTime(c.last_seen)),
          el("td", {}, String(c.resource_count)),
        );
        row.addEventListener("click", () => {
          selectedCluster = c.cluster_id;
          void renderDetail();
        });
        return row;
      });
      data.append(table(["Cluster", "Tags", "Last seen", "Resources"], rows));
    }
    if (selectedCluster) {
      await renderDetail();
    }
  }

  async function renderDetail(): Promise<void> {
    if (!selectedCluster) return;
    clear(detail);
    try {
      const resources = await api.listResources(selectedCluster);
      detail.append(el("h3", {}, `Resources on ${selectedCluster}`));
      if (resources.length === 0) {
        detail.append(el("p", { class: "empty-state" }, "No reported resources."));
        return;
      }
      const rows = resources.map((report) => {
        const key = report.resource_key;
        const row = el(
          "tr",
          { "data-resource": `${key.kind}/${key.namespace}/${key.name}` },
          el("td", {}, key.kind),
          el("td", {}, key.namespace),
          el("td", {}, key.name),
          el("td", {}, report.level),
          el("td", {}, String(report.payload.status?.["phase"] ?? "-")),
          el("td", {}, String(report.observed_at)),
        );
        row.addEventListener("click", (event) => {
          event.stopPropagation();
          showResource(report);
        });
        return row;
      });
      detail.append(table(["Kind", "Namespace", "Name", "Level", "Phase", "Observed"], rows));
    } catch (err) {
      detail.append(errorBox(String(err)));
    }
  }

  function showResource(report: ResourceReport): void {
    const panel = el("div", { class: "resource-panel" });
    panel.append(el("h4", {}, `${report.resource_key.kind}/${report.resource_key.name} (${report.level})`));
    const sections: Array<[string, unknown]> = [
      ["metadata", report.payload.metadata],
      ["status", report.payload.status],
    ];
    if (report.payload.spec !== undefined) {
      sections.push(["spec", report.payload.spec]);
    }
    if (report.payload.object !== undefined) {
      sections.push(["object", report.payload.object]);
    }
    for (const [label, value] of sections) {
      panel.append(
        el("details", { class: `section-${label}` },
          el("summary", {}, label),
          el("pre", {}, JSON.stringify(value, null, 2))),
      );
    }
    const old = detail.querySelector(".resource-panel");
    if (old) old.remove();
    detail.append(panel);
  }

  root.append(el("h2", {}, "Clusters"), data, detail);
  await refresh();
  return { refresh };
}

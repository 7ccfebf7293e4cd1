// Subscriptions page. The version cell is the rollout lever: a dropdown of
// the channel's versions. Changing it PATCHes the subscription, rendering the
// new value optimistically and reconciling with (or reverting to) the server
// response. Flipping to the current version issues no request at all.

import * as api from "../api";
import { clear, el, errorBox, table } from "../dom";
import type { Subscription } from "../types";
import type { ViewHandle } from "./view";

const inFlight = new Set<string>();

export async function mountSubscriptions(root: HTMLElement): Promise<ViewHandle> {
  clear(root);
  const data = el("div", { class: "data-region" });

  async function refresh(): Promise<void> {
    const subs = await api.listSubscriptions();
    const versionsByChannel = new Map<string, string[]>();
    for (const channel of new Set(subs.map((s) => s.channel))) {
      const versions = await api.listVersions(channel);
      versionsByChannel.set(channel, versions.map((v) => v.name));
    }
    clear(data);
    if (subs.length === 0) {
      data.append(el("p", { class: "empty-state" }, "No subscriptions."));
      return;
    }
    const rows = subs.map((sub) => buildRow(sub, versionsByChannel.get(sub.channel) ?? []));
    data.append(table(["Name", "Channel", "Version", "Tags", "Revision", ""], rows));
  }

  root.append(el("h2", {}, "Subscriptions"), data);
  await refresh();
  return { refresh };
}

function buildRow(sub: Subscription, versionNames: string[]): HTMLTableRowElement {
  const select = el("select", { class: "version-flip", "data-sub": sub.name });
  select.append(...versionNames.map((v) => el("option", { value: v }, v)));
  select.value = sub.version;
  const revisionCell = el("td", { class: "revision" }, String(sub.revision));
  const feedback = el("td", { class: "row-feedback" });
  const row = el(
    "tr",
    { "data-sub": sub.name, "data-sub-id": sub.id },
    el("td", {}, sub.name),
    el("td", {}, sub.channel),
    el("td", { class: "version-cell" }, select),
    el("td", {}, sub.tags.join(",")),
    revisionCell,
    feedback,
  );

  let committed = sub.version;
  select.addEventListener("change", () => {
    const target = select.value;
    if (target === committed) {
      return; // no-op guard: same version, no PATCH
    }
    if (inFlight.has(sub.id)) {
      select.value = committed;
      return; // one in-flight mutation per subscription
    }
    inFlight.add(sub.id);
    clear(feedback);
    row.classList.add("pending"); // optimistic: dropdown already shows the target
    api
      .setSubscriptionVersion(sub.id, target)
      .then((updated) => {
        committed = updated.version;
        select.value = updated.version;
        revisionCell.textContent = String(updated.revision);
      })
      .catch((err) => {
        select.value = committed; // failed flip reverts the row
        feedback.append(errorBox(err instanceof api.ApiError ? `${err.code}: ${err.message}` : String(err)));
      })
      .finally(() => {
        row.classList.remove("pending");
        inFlight.delete(sub.id);
      });
  });
  return row;
}

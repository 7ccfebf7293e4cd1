// Alert rules (create/delete) and the live firings list.

import * as api from "../api";
import { clear, el, errorBox, table } from "../dom";
import type { ViewHandle } from "./view";

export async function mountAlerts(root: HTMLElement): Promise<ViewHandle> {
  clear(root);
  const rulesRegion = el("div", { class: "data-region rules" });
  const firingsRegion = el("div", { class: "data-region firings" });

  async function refresh(): Promise<void> {
    const [rules, firings] = await Promise.all([api.listAlertRules(), api.listFirings()]);
    clear(rulesRegion);
    if (rules.length === 0) {
      rulesRegion.append(el("p", { class: "empty-state" }, "No alert rules."));
    } else {
      const rows = rules.map((rule) => {
        const remove = el("button", { class: "delete-rule", type: "button" }, "delete");
        remove.addEventListener("click", () => {
          void api.deleteAlertRule(rule.id).then(refresh);
        });
        return el(
          "tr",
          { "data-rule": rule.id },
          el("td", {}, rule.name),
          el("td", {}, rule.condition.type),
          el("td", {}, JSON.stringify(rule.condition)),
          el("td", {}, remove),
        );
      });
      rulesRegion.append(table(["Name", "Type", "Condition", ""], rows));
    }
    clear(firingsRegion);
    firingsRegion.append(el("h3", {}, "Firings"));
    if (firings.length === 0) {
      firingsRegion.append(el("p", { class: "empty-state" }, "Nothing firing."));
    } else {
      const rows = firings.map((f) =>
        el(
          "tr",
          { "data-subject": f.subject },
          el("td", {}, f.rule_id),
          el("td", {}, f.subject),
          el("td", {}, String(f.since)),
        ),
      );
      firingsRegion.append(table(["Rule", "Subject", "Since"], rows));
    }
  }

  root.append(el("h2", {}, "Alerts"), rulesRegion, buildRuleForm(refresh), firingsRegion);
  await refresh();
  return { refresh };
}

function buildRuleForm(refresh: () => Promise<void>): HTMLElement {
  const name = el("input", { name: "rule-name", placeholder: "rule name" });
  const type = el("select", { name: "rule-type" });
  type.append(
    el("option", { value: "cluster_stale" }, "cluster_stale"),
    el("option", { value: "resource_status_not" }, "resource_status_not"),
  );
  const maxSilence = el("input", { name: "rule-max-silence", value: "90" });
  const expected = el("input", { name: "rule-expected", value: "Running" });
  const grace = el("input", { name: "rule-grace", value: "60" });
  const feedback = el("div", { class: "form-feedback" });
  const form = el("form", { class: "create-rule" });
  form.append(
    el("h3", {}, "Add rule"),
    el("label", {}, "Name ", name),
    el("label", {}, "Type ", type),
    el("label", {}, "Max silence (s) ", maxSilence),
    el("label", {}, "Expected phase ", expected),
    el("label", {}, "Grace (s) ", grace),
    el("button", { type: "submit" }, "Create"),
    feedback,
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    clear(feedback);
    const condition =
      type.value === "cluster_stale"
        ? { type: "cluster_stale", max_silence: Number(maxSilence.value) }
        : { type: "resource_status_not", expected: expected.value, grace: Number(grace.value) };
    api
      .createAlertRule(name.value.trim(), condition)
      .then(() => {
        name.value = "";
        return refresh();
      })
      .catch((err) => feedback.append(errorBox(String(err))));
  });
  return form;
}

// Sign-in form: credentials entered once and kept in memory only.

import { clear, el } from "../dom";
import { setSession } from "../session";

export function mountLogin(root: HTMLElement, onSignedIn: () => void): void {
  clear(root);
  const baseUrl = el("input", { name: "base-url", value: "http://127.0.0.1:8080" });
  const apiKey = el("input", { name: "api-key", type: "password" });
  const userId = el("input", { name: "user-id" });
  const orgKey = el("input", { name: "org-key", type: "password" });
  const form = el("form", { class: "login" });
  form.append(
    el("h2", {}, "Sign in"),
    el("label", {}, "Control plane URL ", baseUrl),
    el("label", {}, "API key ", apiKey),
    el("label", {}, "User id ", userId),
    el("label", {}, "Org key (uploads only) ", orgKey),
    el("button", { type: "submit" }, "Sign in"),
    el("p", { class: "hint" }, "Credentials stay in this tab's memory."),
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    setSession({
      baseUrl: baseUrl.value.trim(),
      apiKey: apiKey.value,
      userId: userId.value.trim(),
      orgKey: orgKey.value,
    });
    onSignedIn();
  });
  root.append(form);
}

// Channels page: list with version counts, add-channel and upload-version forms.
// The table lives in a data region refreshed on the poll cycle; forms persist.

import * as api from "../api";
import { clear, el, errorBox, table } from "../dom";
import type { ViewHandle } from "./view";

export async function mountChannels(root: HTMLElement): Promise<ViewHandle> {
  clear(root);
  const data = el("div", { class: "data-region" });
  const channelNames: string[] = [];
  const uploadChannel = el("select", { name: "upload-channel" });

  async function refresh(): Promise<void> {
    const channels = await api.listChannels();
    clear(data);
    if (channels.length === 0) {
      data.append(el("p", { class: "empty-state" }, "No channels yet. Create one below."));
    } else {
      const rows = channels.map((c) =>
        el(
          "tr",
          { "data-channel": c.name },
          el("td", {}, c.name),
          el("td", { class: "version-count" }, String(c.version_count)),
          el("td", {}, c.latest ?? "-"),
        ),
      );
      data.append(table(["Name", "Versions", "Latest"], rows));
    }
    const selected = uploadChannel.value;
    channelNames.splice(0, channelNames.length, ...channels.map((c) => c.name));
    clear(uploadChannel as unknown as HTMLElement);
    uploadChannel.append(...channelNames.map((n) => el("option", { value: n }, n)));
    if (channelNames.includes(selected)) {
      uploadChannel.value = selected;
    }
  }

  root.append(el("h2", {}, "Channels"), data, buildCreateForm(refresh), buildUploadForm(uploadChannel, refresh));
  await refresh();
  return { refresh };
}

function buildCreateForm(refresh: () => Promise<void>): HTMLElement {
  const name = el("input", { name: "channel-name", placeholder: "channel name" });
  const feedback = el("div", { class: "form-feedback" });
  const form = el("form", { class: "create-channel" });
  form.append(el("h3", {}, "Add channel"), name, el("button", { type: "submit" }, "Create"), feedback);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    clear(feedback);
    api
      .createChannel(name.value.trim())
      .then(() => {
        name.value = "";
        return refresh();
      })
      .catch((err) => feedback.append(errorBox(describe(err))));
  });
  return form;
}

function buildUploadForm(channel: HTMLSelectElement, refresh: () => Promise<void>): HTMLElement {
  const version = el("input", { name: "upload-version", placeholder: "version, e.g. 2.0" });
  const bundle = el("textarea", {
    name: "upload-bundle",
    rows: "6",
    placeholder: "multi-document YAML bundle",
  });
  const feedback = el("div", { class: "form-feedback" });
  const form = el("form", { class: "upload-version" });
  form.append(
    el("h3", {}, "Upload version"),
    el("label", {}, "Channel ", channel),
    el("label", {}, "Version ", version),
    bundle,
    el("button", { type: "submit" }, "Upload"),
    feedback,
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    clear(feedback);
    api
      .uploadVersion(channel.value, version.value.trim(), bundle.value)
      .then((receipt) => {
        feedback.append(
          el("div", { class: "success" }, `uploaded ${receipt.version.name} (${receipt.version.uid})`),
        );
        bundle.value = "";
        version.value = "";
        return refresh();
      })
      .catch((err) => feedback.append(errorBox(describe(err))));
  });
  return form;
}

function describe(err: unknown): string {
  if (err instanceof api.ApiError) return `${err.code}: ${err.message}`;
  return String(err);
}

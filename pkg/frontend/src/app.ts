// App shell: hash routing between pages and a periodic refresh loop.
// Rendering is read-only (GETs); every mutation is an explicit user action.
// The refresh timer is cancelled and restarted on navigation.

import { clear, el, errorBox } from "./dom";
import { getSession, setSession, type Session } from "./session";
import { mountAlerts } from "./views/alerts";
import { mountChannels } from "./views/channels";
import { mountClusters } from "./views/clusters";
import { mountLogin } from "./views/login";
import { mountSubscriptions } from "./views/subscriptions";
import type { ViewHandle } from "./views/view";

export const DEFAULT_REFRESH_MS = 5000;

export type PageName = "channels" | "subscriptions" | "clusters" | "alerts";

const PAGES: Record<PageName, (root: HTMLElement) => Promise<ViewHandle>> = {
  channels: mountChannels,
  subscriptions: mountSubscriptions,
  clusters: mountClusters,
  alerts: mountAlerts,
};

export interface AppConfig {
  session?: Session;
  refreshMs?: number;
}

export interface AppHandle {
  navigate(page: PageName): Promise<void>;
  currentPage(): PageName | null;
  refreshNow(): Promise<void>;
  stop(): void;
}

export function startApp(root: HTMLElement, config: AppConfig = {}): AppHandle {
  const refreshMs = config.refreshMs ?? DEFAULT_REFRESH_MS;
  if (config.session) {
    setSession(config.session);
  }

  clear(root);
  const nav = el("nav", {});
  const content = el("main", { class: "content" });
  root.append(nav, content);

  let current: PageName | null = null;
  let view: ViewHandle | null = null;
  let timer: ReturnType<typeof setInterval> | null = null;
  let navEpoch = 0;

  for (const page of Object.keys(PAGES) as PageName[]) {
    const link = el("a", { href: `#/${page}`, "data-page": page }, page);
    link.addEventListener("click", (event) => {
      event.preventDefault();
      window.location.hash = `#/${page}`;
      void navigate(page);
    });
    nav.append(link);
  }

  function stopTimer(): void {
    if (timer !== null) {
      clearInterval(timer);
      timer = null;
    }
  }

  function startTimer(): void {
    stopTimer();
    timer = setInterval(() => {
      void refreshNow();
    }, refreshMs);
  }

  async function refreshNow(): Promise<void> {
    if (view) {
      try {
        await view.refresh();
      } catch (err) {
        const banner = errorBox(`refresh failed: ${String(err)}`);
        banner.classList.add("refresh-error");
        content.querySelector(".refresh-error")?.remove();
        content.prepend(banner);
      }
    }
  }

  async function navigate(page: PageName): Promise<void> {
    if (!getSession()) {
      stopTimer();
      mountLogin(content, () => {
        void navigate(page);
      });
      return;
    }
    // Mount into a detached container; a navigation that was superseded while
    // awaiting its data must not touch the live DOM or the refresh handle.
    const epoch = ++navEpoch;
    stopTimer();
    let mounted: ViewHandle | null = null;
    let failure: unknown = null;
    const container = el("div", { class: "page" });
    try {
      mounted = await PAGES[page](container);
    } catch (err) {
      failure = err;
    }
    if (epoch !== navEpoch) {
      return;
    }
    current = page;
    for (const link of nav.querySelectorAll("a")) {
      link.classList.toggle("active", link.dataset.page === page);
    }
    clear(content);
    if (failure !== null) {
      content.append(errorBox(`failed to load ${page}: ${String(failure)}`));
      view = null;
    } else {
      content.append(container);
      view = mounted;
    }
    startTimer();
  }

  window.addEventListener("hashchange", () => {
    const page = pageFromHash(window.location.hash);
    if (page && page !== current) {
      void navigate(page);
    }
  });

  const initial = pageFromHash(window.location.hash) ?? "channels";
  void navigate(initial);

  return {
    navigate,
    currentPage: () => current,
    refreshNow,
    stop: stopTimer,
  };
}

function pageFromHash(hash: string): PageName | null {
  const name = hash.replace(/^#\//, "");
  return name in PAGES ? (name as PageName) : null;
}

declare global {
  interface Window {
    razorcdDashboard?: { startApp: typeof startApp };
  }
}

if (typeof window !== "undefined" && document.getElementById("app")) {
  window.razorcdDashboard = { startApp };
  startApp(document.getElementById("app") as HTMLElement);
}

// Typed client for the control-plane HTTP API. Every request funnels through
// call(), which reports to an optional observer so tests can hold the client
// to the shared interface contract (fixtures/api-contract.json).

import { getSession } from "./session";
import type {
  AlertFiring,
  AlertRule,
  AlertCondition,
  ChannelSummary,
  ClusterSummary,
  ResourceReport,
  Subscription,
  UploadReceipt,
  VersionInfo,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export interface RecordedRequest {
  method: string;
  path: string;
  headers: Record<string, string>;
  bodyKeys: string[];
}

type Observer = (request: RecordedRequest) => void;
let observer: Observer | null = null;

export function setRequestObserver(fn: Observer | null): void {
  observer = fn;
}

interface CallOptions {
  json?: Record<string, unknown>;
  rawBody?: string;
  extraHeaders?: Record<string, string>;
  org?: boolean;
}

async function call<T>(method: string, path: string, options: CallOptions = {}): Promise<T> {
  const session = getSession();
  if (!session) {
    throw new ApiError("no_session", "not signed in", 0);
  }
  const headers: Record<string, string> = {
    "x-api-key": session.apiKey,
    "x-user-id": session.userId,
    ...(options.org ? { "razeedash-org-key": session.orgKey } : {}),
    ...(options.extraHeaders ?? {}),
  };
  let body: string | undefined;
  if (options.json !== undefined) {
    headers["content-type"] = "application/json";
    body = JSON.stringify(options.json);
  } else if (options.rawBody !== undefined) {
    body = options.rawBody;
  }
  observer?.({
    method,
    path,
    headers: { ...headers },
    bodyKeys: options.json ? Object.keys(options.json) : [],
  });
  let response: Response;
  try {
    response = await fetch(session.baseUrl + path, { method, headers, body });
  } catch (err) {
    throw new ApiError("unreachable", String(err), 0);
  }
  const text = await response.text();
  let payload: Record<string, unknown> = {};
  if (text) {
    try {
      payload = JSON.parse(text) as Record<string, unknown>;
    } catch {
      throw new ApiError("bad_response", `non-JSON response: ${text.slice(0, 80)}`, response.status);
    }
  }
  if (!response.ok) {
    throw new ApiError(
      String(payload.code ?? "error"),
      String(payload.message ?? response.statusText),
      response.status,
    );
  }
  return payload as T;
}

// -- channels ----------------------------------------------------------------

export async function listChannels(): Promise<ChannelSummary[]> {
  const data = await call<{ channels: ChannelSummary[] }>("GET", "/api/v1/channels");
  return data.channels;
}

export async function createChannel(name: string): Promise<ChannelSummary> {
  const data = await call<{ channel: ChannelSummary }>("POST", "/api/v1/channels", {
    json: { name },
  });
  return data.channel;
}

export async function listVersions(channel: string): Promise<VersionInfo[]> {
  const data = await call<{ versions: VersionInfo[] }>(
    "GET",
    `/api/v1/channels/${encodeURIComponent(channel)}/versions`,
  );
  return data.versions;
}

export async function uploadVersion(
  channel: string,
  versionName: string,
  bundle: string,
): Promise<UploadReceipt> {
  // Bit-exact upload request: text/yaml body, resource-name + org key headers.
  return call<UploadReceipt>("POST", `/api/v1/channels/${encodeURIComponent(channel)}/version`, {
    rawBody: bundle,
    org: true,
    extraHeaders: { "content-type": "text/yaml", "resource-name": versionName },
  });
}

// -- subscriptions -------------------------------------------------------------

export async function listSubscriptions(): Promise<Subscription[]> {
  const data = await call<{ subscriptions: Subscription[] }>("GET", "/api/v1/subscriptions");
  return data.subscriptions;
}

export async function createSubscription(
  name: string,
  channel: string,
  version: string,
  tags: string[],
): Promise<Subscription> {
  const data = await call<{ subscription: Subscription }>("POST", "/api/v1/subscriptions", {
    json: { name, channel, version, tags },
  });
  return data.subscription;
}

export async function setSubscriptionVersion(id: string, version: string): Promise<Subscription> {
  const data = await call<{ subscription: Subscription }>(
    "PATCH",
    `/api/v1/subscriptions/${encodeURIComponent(id)}/version`,
    { json: { version } },
  );
  return data.subscription;
}

// -- clusters ---------------------------------------------------------------------

export async function listClusters(): Promise<ClusterSummary[]> {
  const data = await call<{ clusters: ClusterSummary[] }>("GET", "/api/v1/clusters");
  return data.clusters;
}

export async function listResources(clusterId: string, kind?: string): Promise<ResourceReport[]> {
  const query = kind ? `?kind=${encodeURIComponent(kind)}` : "";
  const data = await call<{ resources: ResourceReport[] }>(
    "GET",
    `/api/v1/clusters/${encodeURIComponent(clusterId)}/resources${query}`,
  );
  return data.resources;
}

// -- alerts -----------------------------------------------------------------------

export async function listAlertRules(): Promise<AlertRule[]> {
  const data = await call<{ rules: AlertRule[] }>("GET", "/api/v1/alerts");
  return data.rules;
}

export async function createAlertRule(
  name: string,
  condition: AlertCondition,
): Promise<AlertRule> {
  const data = await call<{ rule: AlertRule }>("POST", "/api/v1/alerts", {
    json: { name, condition },
  });
  return data.rule;
}

export async function deleteAlertRule(id: string): Promise<void> {
  await call<{ status: string }>("DELETE", `/api/v1/alerts/${encodeURIComponent(id)}`);
}

export async function listFirings(): Promise<AlertFiring[]> {
  const data = await call<{ firings: AlertFiring[] }>("GET", "/api/v1/alerts/firings");
  return data.firings;
}

export interface ChannelSummary {
  name: string;
  created_at: number;
  version_count: number;
  latest: string | null;
}

export interface VersionInfo {
  uid: string;
  name: string;
  content_hash: string;
  location: string;
  created_at: number;
}

export interface UploadReceipt {
  status: string;
  version: { uid: string; name: string; location: string };
}

export interface Subscription {
  id: string;
  name: string;
  channel: string;
  version: string;
  tags: string[];
  revision: number;
}

export interface ClusterSummary {
  cluster_id: string;
  tags: string[];
  registered_at: number;
  last_seen: number;
  resource_count: number;
}

export interface ResourceKey {
  apiVersion: string;
  kind: string;
  namespace: string;
  name: string;
}

export interface ResourceReport {
  resource_key: ResourceKey;
  level: "lite" | "detail" | "debug";
  payload: {
    metadata: Record<string, unknown>;
    status: Record<string, unknown>;
    spec?: Record<string, unknown>;
    object?: Record<string, unknown>;
  };
  observed_at: number;
  trigger: string;
}

export interface AlertCondition {
  type: string;
  max_silence?: number;
  expected?: string;
  grace?: number;
}

export interface AlertRule {
  id: string;
  name: string;
  condition: AlertCondition;
  scope: Record<string, unknown> | null;
}

export interface AlertFiring {
  rule_id: string;
  subject: string;
  since: number;
}

/** Typed client for the refinement service. All UI state lives server-side;
 * this module is the only place that talks to the network. */

export interface EntityRow {
  kind: string;
  value: string;
  position: number;
}

export interface IntentResponse {
  session_id: string;
  entities: EntityRow[];
  nile_text: string;
  warnings: string[];
}

export interface ConfirmResponse {
  status: string;
}

export interface Conflict {
  severity: string;
  message: string;
  clause: string;
}

export interface DeployResponse {
  commands: string[];
  conflicts: Conflict[];
  deployable: boolean;
}

export interface SessionSnapshot {
  session_id: string;
  status: string;
  utterance: string;
  entities: EntityRow[];
  nile_text: string;
  corrected_nile: string | null;
  warnings: string[];
}

export interface Metrics {
  dataset_size: number;
  last_train_loss: number | null;
  feedback_count: number;
  mean_r2_last_eval: number | null;
}

export interface ErrorDetail {
  error?: string;
  message?: string;
  guidance?: string;
  line?: number;
  col?: number;
}

/** status 0 means the service itself was unreachable. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: ErrorDetail | string,
  ) {
    super(typeof detail === "string" ? detail : detail.message ?? detail.error ?? `HTTP ${status}`);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let res: Response;
  try {
    res = await fetch(path, init);
  } catch {
    throw new ApiError(0, "service unreachable");
  }
  if (!res.ok) {
    let detail: ErrorDetail | string;
    try {
      detail = (await res.json()).detail;
    } catch {
      detail = res.statusText;
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

function post<T>(path: string, body?: unknown): Promise<T> {
  return request<T>(path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body ?? {}),
  });
}

export const api = {
  sendIntent(utterance: string): Promise<IntentResponse> {
    return post("/intent", { utterance });
  },
  confirm(sessionId: string, correctedNile?: string): Promise<ConfirmResponse> {
    return post(
      `/intent/${sessionId}/confirm`,
      correctedNile === undefined ? {} : { corrected_nile: correctedNile },
    );
  },
  deploy(sessionId: string): Promise<DeployResponse> {
    return post(`/intent/${sessionId}/deploy`);
  },
  session(sessionId: string): Promise<SessionSnapshot> {
    return request(`/intent/${sessionId}`);
  },
  metrics(): Promise<Metrics> {
    return request("/metrics");
  },
};

export type Api = typeof api;

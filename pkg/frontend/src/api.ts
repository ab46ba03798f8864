// Typed client for the planning service. Every request the UI makes goes
// through here — nothing else touches the network — so the documented
// endpoint set below is also the complete list of what the UI can do.

import type {
  CdfPayload,
  IntrinsicsDoc,
  OverlayPayload,
  PlanRequest,
  PlanStatus,
  PoseDoc,
  SceneDoc,
  SlicePayload,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface ClientOptions {
  baseUrl?: string;
  token?: string;
  fetchFn?: typeof fetch;
}

export class Client {
  readonly baseUrl: string;
  private token: string | undefined;
  private fetchFn: typeof fetch;

  constructor(opts: ClientOptions = {}) {
    this.baseUrl = (opts.baseUrl ?? "").replace(/\/$/, "");
    this.token = opts.token;
    this.fetchFn = opts.fetchFn ?? fetch.bind(globalThis);
  }

  private async request<T>(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
      signal,
    });
    const text = await res.text();
    let doc: any;
    try {
      doc = text ? JSON.parse(text) : {};
    } catch {
      throw new ApiError(res.status, "bad_payload", `non-JSON response (${res.status})`);
    }
    if (!res.ok) {
      throw new ApiError(res.status, doc.error ?? "error", doc.message ?? `HTTP ${res.status}`);
    }
    return doc as T;
  }

  health(signal?: AbortSignal): Promise<{ status: string }> {
    return this.request("GET", "/healthz", undefined, signal);
  }

  uploadScene(scene: unknown, signal?: AbortSignal): Promise<{ scene_id: string }> {
    return this.request("POST", "/scenes", scene, signal);
  }

  getScene(sceneId: string, signal?: AbortSignal): Promise<SceneDoc> {
    return this.request("GET", `/scenes/${sceneId}`, undefined, signal);
  }

  submitPlan(req: PlanRequest, signal?: AbortSignal): Promise<{ job_id: string }> {
    return this.request("POST", "/plans", req, signal);
  }

  planStatus(jobId: string, signal?: AbortSignal): Promise<PlanStatus> {
    return this.request("GET", `/plans/${jobId}`, undefined, signal);
  }

  slice(jobId: string, z: number, signal?: AbortSignal): Promise<SlicePayload> {
    return this.request("GET", `/plans/${jobId}/slice?z=${encodeURIComponent(z)}`, undefined, signal);
  }

  cdf(jobId: string, signal?: AbortSignal): Promise<CdfPayload> {
    return this.request("GET", `/plans/${jobId}/cdf`, undefined, signal);
  }

  mapMeta(jobId: string, signal?: AbortSignal): Promise<Record<string, unknown>> {
    return this.request("GET", `/plans/${jobId}/map/meta`, undefined, signal);
  }

  overlay(
    planId: string,
    pose: PoseDoc,
    intrinsics: IntrinsicsDoc,
    zHeightM?: number,
    signal?: AbortSignal,
  ): Promise<OverlayPayload> {
    const body: Record<string, unknown> = { plan_id: planId, pose, intrinsics };
    if (zHeightM !== undefined) body.z_height_m = zHeightM;
    return this.request("POST", "/overlay", body, signal);
  }
}

/**
 * Poll a plan job until it reaches a terminal state, yielding every status
 * seen. Throws ApiError from the transport; a "failed" job is yielded (with
 * its error message) and ends the stream, it is not thrown.
 */
export async function* pollPlan(
  client: Client,
  jobId: string,
  intervalMs = 1000,
  signal?: AbortSignal,
): AsyncGenerator<PlanStatus> {
  while (true) {
    const status = await client.planStatus(jobId, signal);
    yield status;
    if (status.state === "done" || status.state === "failed") return;
    await new Promise<void>((resolve, reject) => {
      if (signal?.aborted) {
        reject(new DOMException("aborted", "AbortError"));
        return;
      }
      const t = setTimeout(resolve, intervalMs);
      signal?.addEventListener(
        "abort",
        () => {
          clearTimeout(t);
          reject(new DOMException("aborted", "AbortError"));
        },
        { once: true },
      );
    });
  }
}

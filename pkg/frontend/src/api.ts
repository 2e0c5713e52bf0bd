import type {
  ConfigDetail,
  Envelope,
  GroupInfo,
  JobSnapshot,
  RunInfo,
  SubmitResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function toJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep statusText
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  listRuns(): Promise<RunInfo[]> {
    return fetch(`${this.base}/api/runs`).then((r) => toJson<RunInfo[]>(r));
  }

  listGroups(): Promise<GroupInfo[]> {
    return fetch(`${this.base}/api/groups`).then((r) => toJson<GroupInfo[]>(r));
  }

  createGroup(name: string, runIds: string[]): Promise<GroupInfo> {
    return fetch(`${this.base}/api/groups`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name, run_ids: runIds }),
    }).then((r) => toJson<GroupInfo>(r));
  }

  deleteGroup(name: string): Promise<unknown> {
    return fetch(`${this.base}/api/groups/${encodeURIComponent(name)}`, {
      method: "DELETE",
    }).then((r) => toJson(r));
  }

  submit(plugin: string, target: string, inputs: Record<string, unknown>): Promise<SubmitResponse> {
    return fetch(`${this.base}/api/plugins/${encodeURIComponent(plugin)}/submit`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ target, inputs }),
    }).then((r) => toJson<SubmitResponse>(r));
  }

  pollJob(jobId: string): Promise<JobSnapshot> {
    return fetch(`${this.base}/api/jobs/${encodeURIComponent(jobId)}`).then((r) =>
      toJson<JobSnapshot>(r),
    );
  }

  configDetail(runId: string, configId: number): Promise<ConfigDetail> {
    return fetch(
      `${this.base}/api/runs/${encodeURIComponent(runId)}/config/${configId}`,
    ).then((r) => toJson<ConfigDetail>(r));
  }

  /** Poll a submitted job until done, resolving with its envelope. */
  async awaitResult(
    response: SubmitResponse,
    pollMs = 1000,
    onProgress?: (state: string) => void,
  ): Promise<Envelope> {
    if ("cached" in response) {
      return response.cached;
    }
    for (;;) {
      const snap = await this.pollJob(response.job_id);
      if (snap.state === "done" && snap.result) {
        return snap.result;
      }
      if (snap.state === "failed") {
        throw new ApiError(500, snap.error ?? "job failed");
      }
      onProgress?.(snap.state);
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
  }
}

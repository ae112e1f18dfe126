/** Typed client for the /v1 API.
 *
 * The fetch implementation is injectable so tests can route requests to an
 * in-process fixture service; everything else in the app goes through this
 * client, never through raw fetch.
 */
import type {
  ApiErrorBody,
  LeaderboardResponse,
  MuseumGroupResponse,
  MuseumPromptsResponse,
  Outcome,
  Reveal,
  SampleResponse,
  TaskId,
  VoteResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** A structured error response ({code, message}) from the service. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ArenaClient {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let parsed: Partial<ApiErrorBody> = {};
      try {
        parsed = (await response.json()) as Partial<ApiErrorBody>;
      } catch {
        // non-JSON error body; fall through to the generic message
      }
      throw new ApiError(
        response.status,
        parsed.code ?? "error",
        parsed.message ?? `request failed with status ${response.status}`,
      );
    }
    return (await response.json()) as T;
  }

  sampleBattle(task: TaskId, strategy?: string): Promise<SampleResponse> {
    const body: Record<string, string> = { task };
    if (strategy !== undefined) body["strategy"] = strategy;
    return this.request("POST", "/v1/battles/sample", body);
  }

  vote(battleId: string, outcome: Outcome): Promise<VoteResponse> {
    return this.request("POST", `/v1/battles/${battleId}/vote`, { outcome });
  }

  reveal(battleId: string): Promise<Reveal> {
    return this.request("POST", `/v1/battles/${battleId}/reveal`);
  }

  leaderboard(task: TaskId): Promise<LeaderboardResponse> {
    return this.request("GET", `/v1/leaderboard/${task}`);
  }

  museumPrompts(task: TaskId): Promise<MuseumPromptsResponse> {
    return this.request("GET", `/v1/museum/${task}/prompts`);
  }

  museumGroup(task: TaskId, promptId: string): Promise<MuseumGroupResponse> {
    return this.request("GET", `/v1/museum/${task}/prompts/${promptId}`);
  }
}

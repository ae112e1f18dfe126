/** In-process fixture implementing the /v1 surface the app consumes.
 *
 * Semantics mirror the real service: anonymous samples, one vote per
 * battle, votes after reveal are not counted.  Every request that reaches
 * the "server" is recorded so tests can assert on exact traffic.
 */
import type { FetchLike } from "../src/api.js";
import type { Outcome, TaskId } from "../src/types.js";

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

interface FixtureBattle {
  model_a: string;
  model_b: string;
  revealed: boolean;
  voted: boolean;
}

const PROMPTS = [
  "a watercolor fox in the rain",
  "low-poly mountain road at dawn",
  "macro shot of a dew-covered leaf",
  "brutalist library interior, warm light",
  "origami whale above the clouds",
];

const PAIRS: ReadonlyArray<readonly [number, number]> = [
  [0, 1],
  [0, 2],
  [1, 2],
];

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export class FixtureService {
  readonly models = ["quokka-v2", "zebrafish-xl", "axolotl-9b"] as const;
  readonly requests: RecordedRequest[] = [];
  readonly battles = new Map<string, FixtureBattle>();
  /** When true, the next request rejects like a dead network, then resets. */
  failNext = false;
  private counter = 0;

  voteRequests(): RecordedRequest[] {
    return this.requests.filter((r) => r.path.endsWith("/vote"));
  }

  readonly fetchFn: FetchLike = async (input, init) => {
    if (this.failNext) {
      this.failNext = false;
      throw new TypeError("network request failed");
    }
    const method = init?.method ?? "GET";
    const body =
      typeof init?.body === "string" ? JSON.parse(init.body) : undefined;
    this.requests.push({ method, path: input, body });
    return this.route(method, input, body);
  };

  private route(method: string, path: string, body: unknown): Response {
    if (method === "POST" && path === "/v1/battles/sample") {
      return this.sample(body as { task: TaskId });
    }
    let match = path.match(/^\/v1\/battles\/([^/]+)\/(vote|reveal)$/);
    if (method === "POST" && match) {
      const battle = this.battles.get(match[1]!);
      if (battle === undefined) {
        return json(404, { code: "not_found", message: `no battle '${match[1]}'` });
      }
      if (match[2] === "reveal") {
        battle.revealed = true;
        return json(200, { model_a: battle.model_a, model_b: battle.model_b });
      }
      const outcome = (body as { outcome?: string }).outcome ?? "";
      if (!["leftvote", "rightvote", "tievote", "bothbad_vote"].includes(outcome)) {
        return json(400, { code: "bad_request", message: `bad outcome '${outcome}'` });
      }
      if (battle.voted) {
        return json(409, { code: "conflict", message: "battle already voted" });
      }
      battle.voted = true;
      return json(200, {
        counted: !battle.revealed,
        reveal: { model_a: battle.model_a, model_b: battle.model_b },
      });
    }
    match = path.match(/^\/v1\/leaderboard\/([^/]+)$/);
    if (method === "GET" && match) {
      return this.leaderboard(match[1] as TaskId);
    }
    match = path.match(/^\/v1\/museum\/([^/]+)\/prompts$/);
    if (method === "GET" && match) {
      return json(200, {
        task: match[1],
        prompts: PROMPTS.slice(0, 3).map((text, i) => ({
          prompt_id: `p${i}`,
          prompt_text: text,
        })),
      });
    }
    match = path.match(/^\/v1\/museum\/([^/]+)\/prompts\/([^/]+)$/);
    if (method === "GET" && match) {
      const index = Number(match[2]!.slice(1));
      const text = PROMPTS[index];
      if (text === undefined) {
        return json(404, { code: "not_found", message: `no group '${match[2]}'` });
      }
      return json(200, {
        task: match[1],
        prompt_id: match[2],
        prompt_text: text,
        source_image_ref: null,
        entries: this.models.map((model, k) => ({
          model_id: model,
          artifact_uri: `media/${match[2]}-entry${k}.png`,
          media_type: "image",
        })),
      });
    }
    return json(404, { code: "not_found", message: `no route ${method} ${path}` });
  }

  private sample(body: { task: TaskId }): Response {
    const n = this.counter++;
    const pair = PAIRS[n % PAIRS.length]!;
    const flip = n % 2 === 1;
    const [left, right] = flip ? [pair[1], pair[0]] : pair;
    const id = `battle-${n}`;
    this.battles.set(id, {
      model_a: this.models[left]!,
      model_b: this.models[right]!,
      revealed: false,
      voted: false,
    });
    return json(200, {
      battle_id: id,
      task: body.task,
      prompt_id: `p${n % PROMPTS.length}`,
      prompt: PROMPTS[n % PROMPTS.length],
      source_image_ref: null,
      media_type: "image",
      output_a_uri: `media/out-${n}-left.png`,
      output_b_uri: `media/out-${n}-right.png`,
      expires_at: Date.now() + 3_600_000,
    });
  }

  private leaderboard(task: TaskId): Response {
    if (task !== "text_to_image") {
      return json(200, {
        task,
        status: "need counted votes between at least 2 models",
        entries: [],
      });
    }
    return json(200, {
      task,
      status: "ok",
      entries: [
        { model: "axolotl-9b", rating: 1105.2, ci_lower: 1080.1, ci_upper: 1130.8, battles: 210 },
        { model: "quokka-v2", rating: 1012.4, ci_lower: 990.9, ci_upper: 1031.0, battles: 195 },
        { model: "zebrafish-xl", rating: 882.4, ci_lower: 858.3, ci_upper: 909.6, battles: 187 },
      ],
    });
  }
}

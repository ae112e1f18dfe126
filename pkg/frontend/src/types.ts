/** Wire types for the /v1 arena API; mirrors the service's JSON schema. */

export type TaskId = "text_to_image" | "image_editing" | "text_to_video";

export type MediaType = "image" | "video";

export type Outcome = "leftvote" | "rightvote" | "tievote" | "bothbad_vote";

export const TASKS: readonly TaskId[] = [
  "text_to_image",
  "image_editing",
  "text_to_video",
];

export const OUTCOMES: readonly Outcome[] = [
  "leftvote",
  "rightvote",
  "tievote",
  "bothbad_vote",
];

export interface SampleResponse {
  battle_id: string;
  task: TaskId;
  prompt_id: string;
  prompt: string;
  source_image_ref: string | null;
  media_type: MediaType;
  output_a_uri: string;
  output_b_uri: string;
  expires_at: number;
}

export interface Reveal {
  model_a: string;
  model_b: string;
}

export interface VoteResponse {
  counted: boolean;
  reveal: Reveal;
}

export interface LeaderboardEntry {
  model: string;
  rating: number;
  ci_lower: number;
  ci_upper: number;
  battles: number;
}

export interface LeaderboardResponse {
  task: TaskId;
  status: string;
  entries: LeaderboardEntry[];
}

export interface MuseumPromptSummary {
  prompt_id: string;
  prompt_text: string;
}

export interface MuseumPromptsResponse {
  task: TaskId;
  prompts: MuseumPromptSummary[];
}

export interface MuseumGroupEntry {
  model_id: string;
  artifact_uri: string;
  media_type: MediaType;
}

export interface MuseumGroupResponse {
  task: TaskId;
  prompt_id: string;
  prompt_text: string;
  source_image_ref: string | null;
  entries: MuseumGroupEntry[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

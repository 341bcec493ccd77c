/** Payload shapes of the query service. The UI is a pure view over these:
 *  it never re-scores or re-orders anything client-side. */

export interface ScoredRow {
  hashtag: string;
  similarity: number;
  rerank_score: number;
  post_count: number;
  index_ref: number;
  search_volume: number | null;
}

export interface SearchPanel {
  hashtag: string;
  score: number;
  similarity: number;
  index_id: number;
  post_count: number;
  timestamps: number[];
}

export interface TrendResponse {
  tag: string;
  from: number;
  to: number;
  trend: number;
  buckets: number[];
}

export interface CategoryNode {
  id: string;
  name: string;
  children: CategoryNode[];
}

export interface Stats {
  digest: string;
  built_at: number;
  dim: number;
  node_counts: Record<string, number>;
  record_count: number;
  category_count: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

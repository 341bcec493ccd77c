"""End-to-end walkthrough of the library surface.

Builds a graph from a generated corpus, trains all stages, then exercises
ranking, search-style lookup, trending and snapshot persistence. Run:

    python demos/generate_corpus.py demos/data
    python demos/walkthrough.py
"""

import pathlib
import tempfile

from tagrank.embedding import TrainConfig
from tagrank.graph import (EdgeKind, NodeKind, build_graph, graph_digest,
                           random_walk, read_categories, read_posts)
from tagrank.pipeline import build_snapshot
from tagrank.ranking import RankingOptions, rank_hashtags, trending
from tagrank.snapshot import ModelSnapshot

DATA = pathlib.Path(__file__).parent / "data"

# --- 1. ingest the corpora into the typed behavior graph -----------------

posts, rejects = read_posts(DATA / "posts.jsonl")
categories = read_categories(DATA / "categories.jsonl")
print(f"ingested {len(posts)} posts ({len(rejects)} rejected), "
      f"{len(categories)} categories")

graph = build_graph(posts, categories)
for kind in NodeKind:
    print(f"  {kind.name.lower():<9} nodes: {graph.node_counts[kind]}")
print(f"  digest: {graph_digest(graph)}")

# a deterministic random walk from the first hashtag
start = graph.find(NodeKind.HASHTAG, graph.labels[NodeKind.HASHTAG][0])
walk = random_walk(graph, start, length=8, seed=2)
print("sample walk:", " -> ".join(graph.label(n) for n in walk.nodes))

# --- 2. train every stage and assemble a snapshot ------------------------

cfg = TrainConfig(dim=16, walks_per_node=4, walk_length=8, window=3,
                  negatives=3, epochs=3, seed=11, preference_epochs=3,
                  encoder_epochs=3)
snapshot = build_snapshot(posts, categories, cfg)
print(f"\nsnapshot built: dim={snapshot.dim}, "
      f"{len(snapshot.index.records)} hashtag records")

# --- 3. ranked retrieval for a category keyword --------------------------

opts = RankingOptions(top_n=8)
print("\ntop hashtags for 'shoes':")
for row in rank_hashtags("shoes", opts, snapshot):
    print(f"  {row.hashtag:<18} sim={row.similarity:+.4f} "
          f"rerank={row.rerank_score:.4f} posts={row.post_count}")

# post-count filtering, popularity-heavy weighting
opts = RankingOptions(top_n=5, min_post_count=3,
                      rerank_weights=(0.2, 0.7, 0.1))
print("\npopularity-weighted, at least 3 posts:")
for row in rank_hashtags("makeup", opts, snapshot):
    print(f"  {row.hashtag:<18} rerank={row.rerank_score:.4f} "
          f"posts={row.post_count}")

# --- 4. trending over a time window ---------------------------------------

rec = next(iter(snapshot.index.records.values()))
window = (min(rec.timestamps), max(rec.timestamps) + 1)
print(f"\ntrend of {rec.text} over its lifetime: "
      f"{trending(rec.timestamps, window):+.3f}")

# --- 5. persistence round trip --------------------------------------------

with tempfile.TemporaryDirectory() as td:
    path = pathlib.Path(td) / "model.bin"
    snapshot.save(path)
    reloaded = ModelSnapshot.load(path)
    same = rank_hashtags("shoes", RankingOptions(top_n=3), snapshot) == \
        rank_hashtags("shoes", RankingOptions(top_n=3), reloaded)
    print(f"\nsaved {path.stat().st_size} bytes; "
          f"reloaded snapshot ranks identically: {same}")

print("\nnext: `python -m tagrank serve --snapshot <path>` and open the "
      "frontend, or `python -m tagrank query --help`.")

"""Generate a small synthetic corpus (posts.jsonl + categories.jsonl).

Usage:
    python demos/generate_corpus.py [out_dir] [--posts N] [--seed S]

The corpus mimics short product-flavored posts: each post has a user, a
snippet of text, 1-3 camel-case hashtags and an epoch timestamp.
"""

import argparse
import json
import pathlib

import numpy as np

ADJECTIVES = ["red", "blue", "shiny", "vintage", "cozy", "budget", "luxury",
              "organic", "summer", "urban", "classic", "glossy"]
NOUNS = ["shoes", "bag", "dress", "makeup", "lipstick", "phone", "laptop",
         "camera", "watch", "bike", "coffee", "poster"]
VERBS = ["love", "found", "reviewing", "unboxing", "comparing", "selling"]

CATEGORIES = [
    ("c-fashion", "fashion", None),
    ("c-shoes", "shoes", "c-fashion"),
    ("c-bags", "bag", "c-fashion"),
    ("c-beauty", "beauty", None),
    ("c-makeup", "makeup", "c-beauty"),
    ("c-electronics", "electronics", None),
    ("c-phones", "phone", "c-electronics"),
    ("c-cameras", "camera", "c-electronics"),
]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("out_dir", nargs="?", default="demos/data")
    parser.add_argument("--posts", type=int, default=400)
    parser.add_argument("--users", type=int, default=40)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def tag():
        a = ADJECTIVES[rng.integers(len(ADJECTIVES))]
        n = NOUNS[rng.integers(len(NOUNS))]
        return f"#{a.capitalize()}{n.capitalize()}"

    with open(out / "posts.jsonl", "w", encoding="utf-8") as fh:
        for i in range(args.posts):
            words = [ADJECTIVES[rng.integers(len(ADJECTIVES))],
                     NOUNS[rng.integers(len(NOUNS))],
                     VERBS[rng.integers(len(VERBS))],
                     NOUNS[rng.integers(len(NOUNS))]]
            record = {
                "id": f"post{i:05d}",
                "user": f"user{rng.integers(args.users):03d}",
                "text": " ".join(words) + ". nice find!",
                "hashtags": sorted({tag() for _ in range(rng.integers(1, 4))}),
                "timestamp": int(rng.integers(1_600_000_000, 1_700_000_000)),
            }
            fh.write(json.dumps(record) + "\n")

    with open(out / "categories.jsonl", "w", encoding="utf-8") as fh:
        for cid, name, parent in CATEGORIES:
            fh.write(json.dumps({"id": cid, "name": name, "parent": parent})
                     + "\n")

    print(f"wrote {args.posts} posts and {len(CATEGORIES)} categories "
          f"under {out}/")


if __name__ == "__main__":
    main()

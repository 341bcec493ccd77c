import numpy as np
import pytest

from tagrank.embedding import TrainConfig
from tagrank.graph import CategoryRecord, PostRecord
from tagrank.pipeline import build_snapshot

WORD_POOL = [
    "red", "blue", "green", "shiny", "vintage", "classic", "modern", "cozy",
    "sporty", "glossy", "matte", "budget", "luxury", "handmade", "organic",
    "summer", "winter", "travel", "daily", "urban",
]
NOUN_POOL = [
    "shoes", "boots", "bag", "dress", "makeup", "lipstick", "phone", "laptop",
    "camera", "watch", "sofa", "lamp", "bike", "guitar", "coffee", "tea",
    "plant", "poster", "ring", "jacket",
]


def small_posts() -> list[PostRecord]:
    """Hand-written corpus: 6 users, 12 hashtags, deliberate quirks (a
    comma hashtag for CSV quoting, a user with no hashtags)."""
    raw = [
        ("p01", "alice", "red shoes on sale today. amazing deal!",
         ["#RedShoes", "#sale"], 1_000),
        ("p02", "alice", "running shoes review for the marathon",
         ["#shoes", "#running"], 2_000),
        ("p03", "bob", "makeup tutorial for beginners",
         ["#makeup", "#beauty"], 3_000),
        ("p04", "bob", "glossy lipstick shades i love",
         ["#makeup", "#lipstick"], 4_000),
        ("p05", "carol", "vintage camera haul from the flea market",
         ["#vintage", "#camera"], 5_000),
        ("p06", "carol", "new phone unboxing. first impressions",
         ["#phone"], 6_000),
        ("p07", "dave", "budget laptop for students",
         ["#laptop", "#budget"], 7_000),
        ("p08", "dave", "red shoes again. they are great shoes",
         ["#RedShoes"], 8_000),
        ("p09", "erin", "weird tag with a comma in it",
         ["#red,shoes"], 9_000),
        ("p10", "frank", "no hashtags in this post at all", [], 10_000),
        ("p11", "erin", "summer dress ideas for the beach",
         ["#dress", "#summer"], 11_000),
        ("p12", "bob", "makeup brushes compared", ["#makeup"], 12_000),
    ]
    return [PostRecord(*r) for r in raw]


def small_categories() -> list[CategoryRecord]:
    return [
        CategoryRecord("c-fashion", "fashion", None),
        CategoryRecord("c-shoes", "shoes", "c-fashion"),
        CategoryRecord("c-beauty", "beauty", "c-fashion"),
        CategoryRecord("c-electronics", "electronics", None),
        CategoryRecord("c-phones", "phone", "c-electronics"),
        CategoryRecord("c-cameras", "camera", "c-electronics"),
    ]


def small_config(**overrides) -> TrainConfig:
    base = dict(dim=8, walks_per_node=3, walk_length=6, window=2, negatives=2,
                epochs=2, learning_rate=0.05, seed=13, preference_epochs=2,
                encoder_epochs=2)
    base.update(overrides)
    return TrainConfig(**base)


def synthetic_corpus(n_hashtags: int = 1000, n_users: int = 120,
                     seed: int = 2024):
    """Roughly one post per hashtag, camel-case hashtags built from two
    word pools so keyword tokens hit postings."""
    rng = np.random.default_rng(seed)
    pairs = set()
    while len(pairs) < n_hashtags:
        a = WORD_POOL[rng.integers(len(WORD_POOL))]
        b = NOUN_POOL[rng.integers(len(NOUN_POOL))]
        c = rng.integers(0, 50)
        pairs.add((a, b, int(c)))
    hashtags = [f"#{a.capitalize()}{b.capitalize()}{c if c >= 25 else ''}"
                for a, b, c in sorted(pairs)]
    hashtags = list(dict.fromkeys(hashtags))[:n_hashtags]
    while len(hashtags) < n_hashtags:
        hashtags.append(f"#Extra{len(hashtags)}Tag")

    posts = []
    for i, tag in enumerate(hashtags):
        extra = [hashtags[int(rng.integers(0, len(hashtags)))]
                 for _ in range(int(rng.integers(0, 3)))]
        text_words = [WORD_POOL[rng.integers(len(WORD_POOL))]
                      for _ in range(int(rng.integers(3, 8)))]
        text_words += [NOUN_POOL[rng.integers(len(NOUN_POOL))]]
        posts.append(PostRecord(
            id=f"post{i:04d}",
            user=f"user{int(rng.integers(0, n_users)):03d}",
            text=" ".join(text_words),
            hashtags=list(dict.fromkeys([tag, *extra])),
            timestamp=int(rng.integers(10_000, 100_000)),
        ))
    categories = [CategoryRecord(f"cat-{n}", n, None)
                  for n in ("shoes", "makeup", "camera", "phone", "bag",
                            "dress", "watch", "coffee")]
    return posts, categories


@pytest.fixture(scope="session")
def small_snapshot():
    return build_snapshot(small_posts(), small_categories(), small_config())


@pytest.fixture(scope="session")
def small_snapshot_path(small_snapshot, tmp_path_factory):
    path = tmp_path_factory.mktemp("snap") / "small.bin"
    small_snapshot.save(path)
    return path


@pytest.fixture(scope="session")
def big_snapshot():
    """1000-hashtag corpus with minimal training (ranking math does not
    care how good the embeddings are)."""
    posts, categories = synthetic_corpus()
    cfg = TrainConfig(dim=8, walks_per_node=1, walk_length=4, window=2,
                      negatives=2, epochs=1, learning_rate=0.05, seed=3,
                      preference_epochs=1, encoder_epochs=1)
    return build_snapshot(posts, categories, cfg)

"""Capture real service payloads into frontend/tests/fixtures.json.

Trains the same small fixture corpus the backend test suite uses, spins an
in-process client, and records one payload per endpoint the dashboard
renders. Rerun whenever the backend's fixtures or scoring change:

    python frontend/scripts/make_fixtures.py
"""

import json
import pathlib
import sys

REPO = pathlib.Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO / "tests"))

from fastapi.testclient import TestClient  # noqa: E402

from conftest import small_categories, small_config, small_posts  # noqa: E402
from tagrank.pipeline import build_snapshot  # noqa: E402
from tagrank.service import create_app  # noqa: E402


def main():
    snapshot = build_snapshot(small_posts(), small_categories(), small_config())
    out = REPO / "frontend" / "tests" / "fixtures.json"
    tmp = out.parent / "snapshot.bin"
    snapshot.save(tmp)
    client = TestClient(create_app(snapshot_path=str(tmp)))

    fixtures = {
        "categories": client.get("/categories").json(),
        "stats": client.get("/stats").json(),
        "topn": client.get("/topn", params={"category": "c-shoes",
                                            "n": "8"}).json(),
        "topn_empty": client.get("/topn", params={"category": "c-shoes",
                                                  "n": "0"}).json(),
        "search": client.get("/search", params={"q": "makeup"}).json(),
        "search_empty": client.get("/search", params={"q": "qqqzzz"}).json(),
        "trending": client.get("/trending", params={
            "tag": "#makeup", "from": "0", "to": "20000"}).json(),
        "trending_empty": client.get("/trending", params={
            "tag": "#makeup", "from": "100000", "to": "200000"}).json(),
        "export_csv": client.get("/export.csv", params={
            "category": "c-shoes", "n": "8"}).text,
    }
    out.write_text(json.dumps(fixtures, indent=2) + "\n", encoding="utf-8")
    tmp.unlink()
    print(f"wrote {out}")


if __name__ == "__main__":
    main()

import csv
import io

import pytest
from fastapi.testclient import TestClient

from tagrank.embedding import TrainConfig
from tagrank.graph import CategoryRecord, PostRecord
from tagrank.pipeline import build_snapshot
from tagrank.ranking import RankingOptions, rank_hashtags, trend_histogram, trending
from tagrank.service import DEFAULT_CONFIG, create_app, load_service_config


@pytest.fixture(scope="module")
def client(small_snapshot_path):
    app = create_app(snapshot_path=str(small_snapshot_path))
    return TestClient(app)


@pytest.fixture(scope="module")
def snap(small_snapshot):
    return small_snapshot


class TestCategories:
    def test_nested_tree(self, client):
        tree = client.get("/categories").json()
        assert [t["id"] for t in tree] == ["c-electronics", "c-fashion"]
        kids = [c["id"] for c in tree[1]["children"]]
        assert kids == ["c-beauty", "c-shoes"]

    def test_empty_category_file(self, tmp_path):
        posts = [PostRecord("p", "u", "hello world", ["#x"], 1)]
        snapshot = build_snapshot(posts, [], TrainConfig(
            dim=4, walks_per_node=1, walk_length=3, window=2, negatives=1,
            epochs=1, seed=1, preference_epochs=1, encoder_epochs=1))
        path = tmp_path / "nocat.bin"
        snapshot.save(path)
        with TestClient(create_app(snapshot_path=str(path))) as c:
            assert c.get("/categories").json() == []

    def test_byte_identical_repeated_calls(self, client):
        a = client.get("/categories")
        b = client.get("/categories")
        assert a.content == b.content

    def test_503_before_snapshot_load(self):
        with TestClient(create_app()) as c:
            resp = c.get("/categories")
            assert resp.status_code == 503
            body = resp.json()
            assert set(body) == {"code", "message"}


class TestTopN:
    def test_n_zero_empty(self, client):
        resp = client.get("/topn", params={"category": "c-shoes", "n": "0"})
        assert resp.status_code == 200 and resp.json() == []

    def test_matches_library_call(self, client, snap):
        resp = client.get("/topn", params={"category": "c-shoes", "n": "5"})
        rows = rank_hashtags("shoes", RankingOptions(top_n=5), snap)
        assert resp.json() == [
            {"hashtag": r.hashtag, "similarity": r.similarity,
             "rerank_score": r.rerank_score, "post_count": r.post_count,
             "index_ref": r.index_ref, "search_volume": None}
            for r in rows
        ]

    def test_n_larger_than_candidates(self, client):
        rows = client.get("/topn", params={"category": "c-shoes",
                                           "n": "99999"}).json()
        scores = [r["rerank_score"] for r in rows]
        assert scores == sorted(scores, reverse=True)

    def test_non_integer_n_is_400(self, client):
        resp = client.get("/topn", params={"category": "c-shoes", "n": "two"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad_parameter"

    def test_unknown_category_is_404(self, client):
        resp = client.get("/topn", params={"category": "c-nope"})
        assert resp.status_code == 404
        assert resp.json()["code"] == "unknown_category"

    def test_post_count_filters_apply(self, client):
        rows = client.get("/topn", params={"category": "c-beauty", "n": "50",
                                           "min_posts": "2"}).json()
        assert all(r["post_count"] >= 2 for r in rows)


class TestSearch:
    def test_empty_q_is_400(self, client):
        assert client.get("/search", params={"q": ""}).status_code == 400
        assert client.get("/search").status_code == 400

    def test_no_match_empty(self, client):
        assert client.get("/search", params={"q": "qqqzzz"}).json() == []

    def test_scores_non_increasing(self, client):
        panels = client.get("/search", params={"q": "shoes"}).json()
        scores = [p["score"] for p in panels]
        assert scores == sorted(scores, reverse=True)

    def test_panel_fields_match_records(self, client, snap):
        panels = client.get("/search", params={"q": "makeup"}).json()
        assert panels
        for p in panels:
            rec = snap.index.records[p["index_id"]]
            assert p["hashtag"] == rec.text
            assert p["post_count"] == rec.post_count
            assert p["timestamps"] == rec.timestamps[-10:]

    def test_untokenizable_q_is_400(self, client):
        assert client.get("/search", params={"q": "!!"}).status_code == 400


class TestTrending:
    def test_window_without_posts(self, client):
        resp = client.get("/trending", params={"tag": "#makeup",
                                               "from": "100000",
                                               "to": "200000"})
        body = resp.json()
        assert body["trend"] == 0.0
        assert body["buckets"] == [0] * 10

    def test_bucket_conservation(self, client, snap):
        rec = snap.record_by_text("#makeup")
        body = client.get("/trending", params={
            "tag": "#makeup", "from": "0", "to": "20000"}).json()
        in_window = [t for t in rec.timestamps if 0 <= t < 20000]
        assert sum(body["buckets"]) == len(in_window)

    def test_matches_library_oracle(self, client, snap):
        rec = snap.record_by_text("#makeup")
        window = (1000, 13000)
        body = client.get("/trending", params={
            "tag": "#makeup", "from": "1000", "to": "13000"}).json()
        assert body["trend"] == trending(rec.timestamps, window)
        assert body["buckets"] == trend_histogram(rec.timestamps, window)

    def test_inverted_window_400(self, client):
        resp = client.get("/trending", params={"tag": "#makeup",
                                               "from": "50", "to": "50"})
        assert resp.status_code == 400

    def test_unknown_tag_404(self, client):
        resp = client.get("/trending", params={"tag": "#nope",
                                               "from": "0", "to": "10"})
        assert resp.status_code == 404

    def test_hash_prefix_optional(self, client):
        a = client.get("/trending", params={"tag": "#makeup", "from": "0",
                                            "to": "20000"}).json()
        b = client.get("/trending", params={"tag": "makeup", "from": "0",
                                            "to": "20000"}).json()
        assert a == b


class TestExportCsv:
    def test_header_only_when_n_zero(self, client):
        resp = client.get("/export.csv", params={"category": "c-shoes",
                                                 "n": "0"})
        assert resp.text == "hashtag,similarity,rerank_score,post_count\r\n"
        assert resp.headers["content-type"].startswith("text/csv")

    def test_roundtrip_matches_topn(self, client):
        params = {"category": "c-shoes", "n": "10"}
        body = client.get("/export.csv", params=params).text
        rows = list(csv.reader(io.StringIO(body)))
        top = client.get("/topn", params=params).json()
        assert rows[0] == ["hashtag", "similarity", "rerank_score", "post_count"]
        assert len(rows) - 1 == len(top)
        for parsed, item in zip(rows[1:], top):
            assert parsed[0] == item["hashtag"]
            assert float(parsed[1]) == item["similarity"]
            assert float(parsed[2]) == item["rerank_score"]
            assert int(parsed[3]) == item["post_count"]

    def test_comma_hashtag_quoted(self, client):
        # fixture contains '#red,shoes'; RFC 4180 requires quoting
        body = client.get("/export.csv", params={"category": "c-shoes",
                                                 "n": "50"}).text
        assert '"#red,shoes"' in body
        parsed = list(csv.reader(io.StringIO(body)))
        assert any(row[0] == "#red,shoes" for row in parsed[1:])

    def test_errors_as_topn(self, client):
        assert client.get("/export.csv",
                          params={"category": "c-nope"}).status_code == 404


class TestAdminAndStats:
    def test_stats_shape(self, client, snap):
        body = client.get("/stats").json()
        assert body["record_count"] == len(snap.index.records)
        assert body["digest"] == str(snap.digest)

    def test_reload_swaps_snapshot(self, small_snapshot_path, tmp_path):
        posts = [PostRecord("p", "u", "tiny corpus", ["#tiny"], 9)]
        cats = [CategoryRecord("c", "tiny", None)]
        other = build_snapshot(posts, cats, TrainConfig(
            dim=4, walks_per_node=1, walk_length=3, window=2, negatives=1,
            epochs=1, seed=2, preference_epochs=1, encoder_epochs=1))
        other_path = tmp_path / "other.bin"
        other.save(other_path)

        with TestClient(create_app(snapshot_path=str(small_snapshot_path))) as c:
            before = c.get("/stats").json()["record_count"]
            resp = c.post("/admin/reload",
                          json={"snapshot": str(other_path)})
            assert resp.status_code == 200
            after = c.get("/stats").json()["record_count"]
            assert before != after and after == 1


class TestConfig:
    def test_defaults_plus_file_plus_env(self, tmp_path, monkeypatch):
        cfg_path = tmp_path / "svc.json"
        cfg_path.write_text('{"port": 9000, "top_n_default": 7}')
        monkeypatch.setenv("TAGRANK_PORT", "9100")
        cfg = load_service_config(str(cfg_path))
        assert cfg["port"] == 9100          # env beats file
        assert cfg["top_n_default"] == 7    # file beats default
        assert cfg["host"] == DEFAULT_CONFIG["host"]

    def test_unknown_keys_rejected(self, tmp_path):
        cfg_path = tmp_path / "svc.json"
        cfg_path.write_text('{"nope": 1}')
        with pytest.raises(ValueError):
            load_service_config(str(cfg_path))

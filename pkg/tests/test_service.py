import json

import pytest
from fastapi.testclient import TestClient

from foragerec.service import CONFIG_ENV_VAR, ServiceConfig, create_app

from conftest import FIXTURES, make_board_json

BOARD_PATHS = [
    str(FIXTURES / "boards" / "spaghetti_bolognese.json"),
    str(FIXTURES / "boards" / "zoodles.json"),
]


@pytest.fixture()
def client():
    config = ServiceConfig(boards=BOARD_PATHS, alpha=0.7, k=10, seed=0)
    with TestClient(create_app(config)) as test_client:
        yield test_client


def start(client, query="zoodles", user="u1", **extra):
    response = client.post(
        "/sessions", json={"user": user, "query": query, **extra}
    )
    assert response.status_code == 201
    return response.json()


class TestConfig:
    def test_defaults(self):
        config = ServiceConfig()
        assert config.host == "127.0.0.1"
        assert config.port == 8765

    @pytest.mark.parametrize(
        "kwargs",
        [{"k": 0}, {"alpha": 1.5}, {"scent_scope": "local"}],
    )
    def test_invalid_values_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ServiceConfig(**kwargs)

    def test_from_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"listen": "0.0.0.0:9000", "k": 3}))
        config = ServiceConfig.from_file(path)
        assert config.port == 9000
        assert config.k == 3

    def test_from_env(self, tmp_path, monkeypatch):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"alpha": 0.5}))
        monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
        assert ServiceConfig.from_env().alpha == 0.5

    def test_from_env_unset_rejected(self, monkeypatch):
        monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
        with pytest.raises(ValueError):
            ServiceConfig.from_env()


class TestHealth:
    def test_reports_catalog_size_and_dim(self, client):
        payload = client.get("/health").json()
        assert payload == {"status": "ok", "items": 6, "dim": 8}

    def test_byte_identical_reads(self, client):
        assert client.get("/health").content == client.get("/health").content


class TestSearch:
    def test_query_returns_cards_in_match_order(self, client):
        payload = client.get("/search", params={"q": "zoodles"}).json()
        assert [card["item_id"] for card in payload["results"]] == ["z1", "z2", "z3"]
        first = payload["results"][0]
        assert first["board"] == "Zoodles"
        assert any(cue["label"] == "zoodles" for cue in first["cues"])

    def test_k_truncates(self, client):
        payload = client.get("/search", params={"q": "zoodles", "k": 1}).json()
        assert len(payload["results"]) == 1

    def test_k_zero_rejected(self, client):
        assert client.get("/search", params={"q": "x", "k": 0}).status_code == 422

    def test_no_match_is_empty_list(self, client):
        assert client.get("/search", params={"q": "granola"}).json()["results"] == []

    def test_byte_identical_reads(self, client):
        first = client.get("/search", params={"q": "zoodles"})
        second = client.get("/search", params={"q": "zoodles"})
        assert first.content == second.content


class TestItems:
    def test_card_fields(self, client):
        card = client.get("/items/z1").json()
        assert card["item_id"] == "z1"
        assert card["board"] == "Zoodles"
        assert card["indexable"] is True
        assert card["image_scent"] is None  # no events recorded yet
        labels = {cue["label"] for cue in card["cues"]}
        assert {"zoodles", "zucchini"} <= labels

    def test_unknown_item_404(self, client):
        assert client.get("/items/nope").status_code == 404

    def test_byte_identical_reads(self, client):
        assert client.get("/items/b2").content == client.get("/items/b2").content


class TestSessions:
    def test_create_returns_patch_and_cost(self, client):
        view = start(client)
        assert [card["item_id"] for card in view["patch"]] == ["z1", "z2", "z3"]
        assert view["phase"] == "results"
        assert view["cost"] == {"steps": 1, "retrievals": 1, "elapsed_ms": 0}
        assert view["diet"]["consumed_cues"] == {}
        assert view["no_matches"] is False

    def test_get_mirrors_create(self, client):
        view = start(client)
        fetched = client.get(f"/sessions/{view['id']}").json()
        assert fetched == view

    def test_unmatched_query_flagged(self, client):
        view = start(client, query="granola")
        assert view["patch"] == []
        assert view["no_matches"] is True

    def test_custom_k_truncates(self, client):
        view = start(client, k=2)
        assert len(view["patch"]) == 2

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/missing").status_code == 404

    def test_sessions_are_independent(self, client):
        a = start(client)
        b = start(client, query="bolognese", user="u2")
        assert a["id"] != b["id"]
        client.post(f"/sessions/{a['id']}/preferences", json={"cue_label": "easy"})
        untouched = client.get(f"/sessions/{b['id']}").json()
        assert untouched["diet"]["consumed_cues"] == {}


class TestPreferences:
    def test_select_advances_the_loop(self, client):
        view = start(client)
        updated = client.post(
            f"/sessions/{view['id']}/preferences", json={"cue_label": "bolognese"}
        ).json()
        assert updated["phase"] == "recommended"
        assert updated["cost"]["steps"] == 2
        assert updated["cost"]["retrievals"] == 2
        assert updated["diet"]["consumed_cues"] == {"bolognese": 1}
        patch_ids = {card["item_id"] for card in updated["patch"]}
        assert {"b1", "b2", "b3"} <= patch_ids
        assert all("score" in card for card in updated["patch"])

    def test_select_feeds_the_scent_report(self, client):
        view = start(client)
        client.post(
            f"/sessions/{view['id']}/preferences", json={"cue_label": "bolognese"}
        )
        report = client.get("/scent-report").json()
        names = [cat["name"] for cat in report["categories"]]
        assert names == ["Spaghetti Bolognese"]
        rows = report["categories"][0]["rows"]
        assert rows[0]["preference"] == "bolognese"
        assert rows[0]["scent"] == 10
        assert report["flags"] == []

    def test_image_scent_appears_after_events(self, client):
        view = start(client)
        client.post(
            f"/sessions/{view['id']}/preferences", json={"cue_label": "zoodles"}
        )
        card = client.get("/items/z1").json()
        assert card["image_scent"] is not None
        assert card["image_scent"] > 0

    def test_unknown_cue_warns_and_keeps_patch(self, client):
        view = start(client)
        updated = client.post(
            f"/sessions/{view['id']}/preferences", json={"cue_label": "granola"}
        ).json()
        assert updated["warning"]
        assert [c["item_id"] for c in updated["patch"]] == [
            c["item_id"] for c in view["patch"]
        ]
        assert updated["cost"]["steps"] == 2
        assert updated["cost"]["retrievals"] == 1

    def test_empty_cue_label_422(self, client):
        view = start(client)
        response = client.post(
            f"/sessions/{view['id']}/preferences", json={"cue_label": ""}
        )
        assert response.status_code == 422

    def test_unknown_session_404(self, client):
        response = client.post(
            "/sessions/missing/preferences", json={"cue_label": "x"}
        )
        assert response.status_code == 404

    def test_double_select_shows_in_diet(self, client):
        view = start(client)
        for _ in range(2):
            updated = client.post(
                f"/sessions/{view['id']}/preferences", json={"cue_label": "easy"}
            ).json()
        assert updated["diet"]["consumed_cues"] == {"easy": 2}


class TestRecommendations:
    def test_returns_neighbors_outside_patch(self, client):
        view = start(client, k=2)
        patch_ids = {card["item_id"] for card in view["patch"]}
        payload = client.get(f"/sessions/{view['id']}/recommendations").json()
        returned = {card["item_id"] for card in payload["results"]}
        assert returned
        assert returned.isdisjoint(patch_ids)

    def test_scores_sorted_descending(self, client):
        view = start(client, k=1)
        payload = client.get(f"/sessions/{view['id']}/recommendations").json()
        scores = [card["score"] for card in payload["results"]]
        assert scores == sorted(scores, reverse=True)

    def test_k_zero_rejected(self, client):
        view = start(client)
        response = client.get(
            f"/sessions/{view['id']}/recommendations", params={"k": 0}
        )
        assert response.status_code == 422


class TestScentReport:
    def test_empty_log_flagged(self, client):
        payload = client.get("/scent-report").json()
        assert payload["categories"] == []
        assert payload["flags"] == ["no preference events recorded"]

    def test_byte_identical_reads(self, client):
        first = client.get("/scent-report")
        second = client.get("/scent-report")
        assert first.content == second.content

    def test_unknown_scope_rejected(self, client):
        assert client.get("/scent-report", params={"scope": "bad"}).status_code == 422

    def test_top_zero_rejected(self, client):
        assert client.get("/scent-report", params={"top": 0}).status_code == 422


class TestBoardValidation:
    def test_valid_board_accepted(self, client):
        response = client.post(
            "/boards",
            files={"file": ("board.json", make_board_json(4), "application/json")},
        )
        payload = response.json()
        assert payload == {
            "valid": True,
            "name": "synthetic",
            "items": 4,
            "violations": [],
        }

    def test_duplicate_ids_reported(self, client):
        board = json.loads(make_board_json(2))
        board["items"][1]["id"] = board["items"][0]["id"]
        response = client.post(
            "/boards",
            files={
                "file": ("board.json", json.dumps(board).encode(), "application/json")
            },
        )
        payload = response.json()
        assert payload["valid"] is False
        assert any(v["rule"] == "id.unique" for v in payload["violations"])

    def test_malformed_json_reported(self, client):
        response = client.post(
            "/boards", files={"file": ("board.json", b"{nope", "application/json")}
        )
        payload = response.json()
        assert payload["valid"] is False
        assert payload["violations"][0]["rule"] == "parse"

    def test_upload_does_not_change_catalog(self, client):
        before = client.get("/health").json()
        client.post(
            "/boards",
            files={"file": ("board.json", make_board_json(50), "application/json")},
        )
        assert client.get("/health").json() == before


class TestNoIndex:
    def test_sessions_unavailable_without_embeddings(self, tmp_path):
        board = {
            "name": "bare",
            "items": [
                {"id": "n1", "title": "no vector", "description": "", "content_labels": []}
            ],
        }
        path = tmp_path / "bare.json"
        path.write_text(json.dumps(board))
        config = ServiceConfig(boards=[str(path)])
        with TestClient(create_app(config)) as bare_client:
            assert bare_client.get("/health").json()["dim"] == 0
            response = bare_client.post(
                "/sessions", json={"user": "u", "query": "anything"}
            )
            assert response.status_code == 503

"""A/B sessions, judgment store, Cohen's kappa, report, and the HTTP API."""

import concurrent.futures

import pytest
from fastapi.testclient import TestClient

from parasphere.evalreport import (AbSession, DuplicateJudgment, JudgmentStore,
                                   SessionError, ab_report, build_app,
                                   cohen_kappa, create_session, next_unjudged,
                                   pairwise_kappa, record_judgment)

INPUTS = [f"input sentence {i}" for i in range(20)]
OUT_A = [f"candidate a {i}" for i in range(20)]
OUT_B = [f"candidate b {i}" for i in range(20)]


def make_session(n_items=6, seed=0, annotators=("ann1", "ann2"), root=None,
                 session_id="s1"):
    return create_session(session_id, INPUTS, OUT_A, OUT_B, list(annotators),
                          n_items=n_items, seed=seed, root=root)


class TestCreateSession:
    def test_seed_determinism(self):
        a, b = make_session(seed=5), make_session(seed=5)
        assert [i.source_index for i in a.items] == [i.source_index for i in b.items]
        assert [i.flipped for i in a.items] == [i.flipped for i in b.items]

    def test_subsample_without_replacement(self):
        session = make_session(n_items=15)
        picked = [i.source_index for i in session.items]
        assert len(set(picked)) == 15
        assert picked == sorted(picked)
        assert all(0 <= p < 20 for p in picked)

    def test_full_corpus_still_shuffles_presentation(self):
        session = make_session(n_items=20)
        assert len(session.items) == 20
        flips = {i.flipped for i in session.items}
        assert flips == {True, False}

    def test_default_item_count_is_200(self):
        inputs = [f"line {i}" for i in range(300)]
        session = create_session("big", inputs, inputs, inputs, ["a"])
        assert len(session.items) == 200

    def test_presented_order_follows_flip(self):
        session = make_session(n_items=20)
        for item in session.items:
            first, second = item.presented()
            if item.flipped:
                assert (first, second) == (item.cand_b, item.cand_a)
            else:
                assert (first, second) == (item.cand_a, item.cand_b)

    def test_validation_errors(self):
        with pytest.raises(SessionError, match="mismatch"):
            create_session("x", INPUTS, OUT_A[:-1], OUT_B, ["a"], n_items=2)
        with pytest.raises(SessionError, match="n_items"):
            make_session(n_items=21)
        with pytest.raises(SessionError, match="n_items"):
            make_session(n_items=0)
        with pytest.raises(SessionError, match="annotator"):
            make_session(annotators=())
        with pytest.raises(SessionError, match="duplicate"):
            make_session(annotators=("a", "a"))

    def test_duplicate_session_id_rejected(self, tmp_path):
        make_session(root=tmp_path)
        with pytest.raises(SessionError, match="already exists"):
            make_session(root=tmp_path)

    def test_persistence_round_trip(self, tmp_path):
        session = make_session(root=tmp_path)
        loaded = AbSession.load(tmp_path / "s1" / "session.json")
        assert loaded == session


class TestJudgments:
    def test_first_vote_accepted(self, tmp_path):
        session = make_session()
        store = JudgmentStore(tmp_path / "j.tsv")
        record = record_judgment(session, store, 0, "ann1", "first",
                                 timestamp=1.0)
        assert record.choice == "first"
        assert store.has("s1", 0, "ann1")

    def test_duplicate_vote_rejected(self, tmp_path):
        session = make_session()
        store = JudgmentStore(tmp_path / "j.tsv")
        record_judgment(session, store, 0, "ann1", "first", timestamp=1.0)
        with pytest.raises(DuplicateJudgment):
            record_judgment(session, store, 0, "ann1", "second", timestamp=2.0)

    def test_neither_allowed(self, tmp_path):
        session = make_session()
        store = JudgmentStore(tmp_path / "j.tsv")
        assert record_judgment(session, store, 0, "ann1", "neither",
                               timestamp=1.0).choice == "neither"

    def test_invalid_submissions_rejected(self, tmp_path):
        session = make_session()
        store = JudgmentStore(tmp_path / "j.tsv")
        with pytest.raises(SessionError, match="unknown item"):
            record_judgment(session, store, 99, "ann1", "first")
        with pytest.raises(SessionError, match="unknown annotator"):
            record_judgment(session, store, 0, "ghost", "first")
        with pytest.raises(SessionError, match="choice"):
            record_judgment(session, store, 0, "ann1", "best")

    def test_store_format_and_reload(self, tmp_path):
        session = make_session()
        path = tmp_path / "j.tsv"
        store = JudgmentStore(path)
        record_judgment(session, store, 0, "ann1", "first", timestamp=3.5)
        record_judgment(session, store, 1, "ann2", "neither", timestamp=4.0)
        lines = path.read_text().splitlines()
        assert lines[0] == "s1\t0\tann1\tfirst\t3.500"
        assert lines[1] == "s1\t1\tann2\tneither\t4.000"
        reloaded = JudgmentStore(path)
        assert reloaded.has("s1", 0, "ann1")
        with pytest.raises(DuplicateJudgment):
            record_judgment(session, reloaded, 0, "ann1", "second")

    def test_concurrent_duplicates_accept_exactly_one(self, tmp_path):
        session = make_session()
        store = JudgmentStore(tmp_path / "j.tsv")

        def submit(k):
            try:
                record_judgment(session, store, 2, "ann1", "first",
                                timestamp=float(k))
                return 1
            except DuplicateJudgment:
                return 0

        with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
            accepted = sum(pool.map(submit, range(16)))
        assert accepted == 1
        assert len((tmp_path / "j.tsv").read_text().splitlines()) == 1

    def test_next_unjudged_walks_items(self, tmp_path):
        session = make_session(n_items=3)
        store = JudgmentStore(tmp_path / "j.tsv")
        assert next_unjudged(session, store, "ann1").item_id == 0
        record_judgment(session, store, 0, "ann1", "first", timestamp=1.0)
        assert next_unjudged(session, store, "ann1").item_id == 1
        assert next_unjudged(session, store, "ann2").item_id == 0
        for i in (1, 2):
            record_judgment(session, store, i, "ann1", "second", timestamp=1.0)
        assert next_unjudged(session, store, "ann1") is None


class TestResolution:
    def test_choice_resolution(self):
        session = make_session(n_items=20)
        flipped = next(i for i in session.items if i.flipped)
        plain = next(i for i in session.items if not i.flipped)
        assert flipped.resolve("first") == "B"
        assert flipped.resolve("second") == "A"
        assert plain.resolve("first") == "A"
        assert plain.resolve("second") == "B"
        assert plain.resolve("neither") == "neither"


class TestCohenKappa:
    def test_perfect_agreement(self):
        pair = cohen_kappa(["A", "B", "A"], ["A", "B", "A"])
        assert pair.kappa == 1.0

    def test_worked_contingency_example(self):
        # 100 items: AA=40, BB=30, AB=20, BA=10
        r1 = ["A"] * 40 + ["B"] * 30 + ["A"] * 20 + ["B"] * 10
        r2 = ["A"] * 40 + ["B"] * 30 + ["B"] * 20 + ["A"] * 10
        pair = cohen_kappa(r1, r2)
        assert pair.p_o == 0.70
        assert pair.p_e == 0.50
        assert pair.kappa == 0.40

    def test_complete_disagreement(self):
        r1 = ["A"] * 50 + ["B"] * 50
        r2 = ["B"] * 50 + ["A"] * 50
        assert cohen_kappa(r1, r2).kappa == -1.0

    def test_degenerate_marginals_undefined(self):
        pair = cohen_kappa(["A", "A"], ["A", "A"])
        assert pair.kappa is None and pair.p_e == 1.0

    def test_self_kappa_with_mixed_ratings(self):
        ratings = ["A", "B", "neither", "A"]
        assert cohen_kappa(ratings, ratings).kappa == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="item counts"):
            cohen_kappa(["A"], ["A", "B"])

    def test_pairwise_over_shared_items(self):
        votes = {"x": {0: "A", 1: "B", 2: "A"},
                 "y": {0: "A", 1: "B", 2: "B"},
                 "z": {1: "B", 2: "A"}}
        report = pairwise_kappa(votes)
        assert set(report.pairs) == {("x", "y"), ("x", "z"), ("y", "z")}
        assert report.pairs[("x", "z")].n_items == 2
        defined = [p.kappa for p in report.pairs.values() if p.kappa is not None]
        assert report.average == sum(defined) / len(defined)


def judged_session(tmp_path, votes_by_annotator, n_items=4,
                   annotators=("ann1", "ann2", "ann3")):
    """votes_by_annotator: annotator -> list of presented-space choices."""
    session = make_session(n_items=n_items, annotators=annotators)
    store = JudgmentStore(tmp_path / "j.tsv")
    for annotator, choices in votes_by_annotator.items():
        for item_id, choice in enumerate(choices):
            if choice is not None:
                record_judgment(session, store, item_id, annotator, choice,
                                timestamp=1.0)
    return session, store


class TestAbReport:
    def test_incomplete_requires_force(self, tmp_path):
        session, store = judged_session(tmp_path, {"ann1": ["first"] * 4})
        with pytest.raises(SessionError, match="not complete"):
            ab_report(session, store)
        assert ab_report(session, store, force=True).status == "open"

    def test_unanimous_choice_is_total(self, tmp_path):
        # every annotator picks whatever presentation slot system A occupies
        session = make_session(n_items=4, annotators=("ann1", "ann2", "ann3"))
        store = JudgmentStore(tmp_path / "j.tsv")
        for annotator in session.annotators:
            for item in session.items:
                choice = "second" if item.flipped else "first"
                record_judgment(session, store, item.item_id, annotator, choice,
                                timestamp=1.0)
        report = ab_report(session, store)
        assert report.status == "complete"
        assert report.votes == {"A": 4}
        assert report.percentages["A"] == 100.0
        assert report.percentages["B"] == 0.0
        assert report.discarded_no_majority == 0

    def test_three_way_split_discarded(self, tmp_path):
        session = make_session(n_items=1, annotators=("ann1", "ann2", "ann3"))
        store = JudgmentStore(tmp_path / "j.tsv")
        for annotator, choice in zip(session.annotators,
                                     ("first", "second", "neither")):
            record_judgment(session, store, 0, annotator, choice, timestamp=1.0)
        with pytest.warns(UserWarning, match="no agreed items"):
            report = ab_report(session, store)
        assert report.agreed_items == 0
        assert report.discarded_no_majority == 1
        assert report.votes == {}

    def test_majority_two_of_three(self, tmp_path):
        session = make_session(n_items=1, annotators=("ann1", "ann2", "ann3"))
        store = JudgmentStore(tmp_path / "j.tsv")
        item = session.items[0]
        a_slot = "second" if item.flipped else "first"
        b_slot = "first" if item.flipped else "second"
        record_judgment(session, store, 0, "ann1", a_slot, timestamp=1.0)
        record_judgment(session, store, 0, "ann2", a_slot, timestamp=1.0)
        record_judgment(session, store, 0, "ann3", b_slot, timestamp=1.0)
        report = ab_report(session, store)
        assert report.votes == {"A": 1}
        assert report.agreed_items == 1

    def test_percentages_sum_to_hundred(self, tmp_path):
        session = make_session(n_items=6)
        store = JudgmentStore(tmp_path / "j.tsv")
        for annotator in session.annotators:
            for item in session.items:
                choice = "first" if item.item_id % 3 else "second"
                record_judgment(session, store, item.item_id, annotator, choice,
                                timestamp=1.0)
        report = ab_report(session, store)
        assert abs(sum(report.percentages.values()) - 100.0) < 1e-9

    def test_zero_agreed_items_warns(self, tmp_path):
        session = make_session(n_items=1)
        store = JudgmentStore(tmp_path / "j.tsv")
        record_judgment(session, store, 0, "ann1", "first", timestamp=1.0)
        record_judgment(session, store, 0, "ann2", "second", timestamp=1.0)
        with pytest.warns(UserWarning, match="no agreed items"):
            report = ab_report(session, store)
        assert report.percentages == {}

    def test_raw_ballot_mode(self, tmp_path):
        session = make_session(n_items=2)
        store = JudgmentStore(tmp_path / "j.tsv")
        for annotator in session.annotators:
            for item in session.items:
                choice = "second" if item.flipped else "first"  # always system A
                record_judgment(session, store, item.item_id, annotator, choice,
                                timestamp=1.0)
        report = ab_report(session, store, require_majority=False)
        assert report.votes == {"A": 4}

    def test_resolution_is_rerunnable(self, tmp_path):
        session = make_session(n_items=3)
        store = JudgmentStore(tmp_path / "j.tsv")
        for annotator in session.annotators:
            for item, choice in zip(session.items, ("first", "second", "neither")):
                record_judgment(session, store, item.item_id, annotator, choice,
                                timestamp=1.0)
        first = ab_report(session, store)
        again = ab_report(session, store)
        assert first.votes == again.votes
        assert first.percentages == again.percentages
        assert first.kappa.average == again.kappa.average

    def test_render_shape(self, tmp_path):
        session = make_session(n_items=2)
        store = JudgmentStore(tmp_path / "j.tsv")
        for annotator in session.annotators:
            for item in session.items:
                choice = "second" if item.flipped else "first"
                record_judgment(session, store, item.item_id, annotator, choice,
                                timestamp=1.0)
        text = ab_report(session, store, names={"A": "ours", "B": "base"}).render()
        assert "ours" in text and "(100.0%)" in text
        assert "pairwise-average kappa" in text


class TestHttpApi:
    def client(self, tmp_path, n_items=3, annotators=("ann1", "ann2")):
        make_session(n_items=n_items, annotators=annotators, root=tmp_path)
        return TestClient(build_app(tmp_path))

    def test_next_payload_is_blind(self, tmp_path):
        client = self.client(tmp_path)
        payload = client.get("/api/session/s1/next",
                             params={"annotator": "ann1"}).json()
        assert set(payload) == {"session", "done", "item_id", "input", "first",
                                "second", "judged", "total"}
        assert {payload["first"], payload["second"]} == \
            {"candidate a " + str(payload["input"].split()[-1]),
             "candidate b " + str(payload["input"].split()[-1])}

    def test_judgment_flow(self, tmp_path):
        client = self.client(tmp_path)
        first = client.get("/api/session/s1/next",
                           params={"annotator": "ann1"}).json()
        posted = client.post("/api/session/s1/judgment",
                             json={"item_id": first["item_id"],
                                   "annotator": "ann1", "choice": "first"})
        assert posted.status_code == 200 and posted.json()["accepted"]
        after = client.get("/api/session/s1/next",
                           params={"annotator": "ann1"}).json()
        assert after["item_id"] == first["item_id"] + 1
        assert after["judged"] == 1

    def test_duplicate_judgment_conflicts(self, tmp_path):
        client = self.client(tmp_path)
        body = {"item_id": 0, "annotator": "ann1", "choice": "first"}
        assert client.post("/api/session/s1/judgment", json=body).status_code == 200
        assert client.post("/api/session/s1/judgment", json=body).status_code == 409

    def test_invalid_submissions(self, tmp_path):
        client = self.client(tmp_path)
        assert client.post("/api/session/s1/judgment",
                           json={"item_id": 99, "annotator": "ann1",
                                 "choice": "first"}).status_code == 404
        assert client.post("/api/session/s1/judgment",
                           json={"item_id": 0, "annotator": "ann1",
                                 "choice": "best"}).status_code == 422
        assert client.get("/api/session/ghost/next",
                          params={"annotator": "ann1"}).status_code == 404
        assert client.get("/api/session/s1/next",
                          params={"annotator": "ghost"}).status_code == 400

    def test_done_after_all_items(self, tmp_path):
        client = self.client(tmp_path, n_items=2)
        for item_id in range(2):
            client.post("/api/session/s1/judgment",
                        json={"item_id": item_id, "annotator": "ann1",
                              "choice": "neither"})
        payload = client.get("/api/session/s1/next",
                             params={"annotator": "ann1"}).json()
        assert payload == {"session": "s1", "done": True, "judged": 2, "total": 2}

    def test_report_endpoint(self, tmp_path):
        client = self.client(tmp_path, n_items=2)
        for annotator in ("ann1", "ann2"):
            for item_id in range(2):
                client.post("/api/session/s1/judgment",
                            json={"item_id": item_id, "annotator": annotator,
                                  "choice": "first"})
        payload = client.get("/api/session/s1/report").json()
        assert payload["status"] == "complete"
        assert payload["agreed_items"] == 2
        assert sum(payload["votes"].values()) == 2
        assert payload["kappa"]["pairs"][0]["n"] == 2

    def test_judgments_survive_app_rebuild(self, tmp_path):
        client = self.client(tmp_path)
        client.post("/api/session/s1/judgment",
                    json={"item_id": 0, "annotator": "ann1", "choice": "first"})
        fresh = TestClient(build_app(tmp_path))
        assert fresh.post("/api/session/s1/judgment",
                          json={"item_id": 0, "annotator": "ann1",
                                "choice": "first"}).status_code == 409

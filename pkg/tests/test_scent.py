import io
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foragerec.catalog import ImageItem
from foragerec.features import Cue
from foragerec.scent import (
    DEFAULT_COUNTED_ACTIONS,
    PreferenceEvent,
    PreferenceLog,
    ScentScore,
    format_report_table,
    frequencies,
    record_preference,
    report_to_dict,
    scale_scent,
    scent_of_image,
    scent_report,
)

SB = "Spaghetti Bolognese"
Z = "Zoodles"

SB_FREQS = {"bolognese": 50, "spaghetti": 35, "recipe": 30, "sauce": 30, "easy": 15}
Z_FREQS = {"zoodles": 45, "zucchini": 40, "easy": 30, "pasta": 25, "chicken": 25}


def build_study_log():
    """Two-category log whose per-cue select counts equal the pinned maps."""
    log = PreferenceLog()
    ts = 0
    for category, freqs in ((SB, SB_FREQS), (Z, Z_FREQS)):
        for cue, count in sorted(freqs.items()):
            for _ in range(count):
                ts += 1
                log.record(
                    PreferenceEvent(
                        user="study",
                        session=f"study-{category}",
                        cue_label=cue,
                        category=category,
                        timestamp=ts,
                    )
                )
    return log


def random_log(rng, n_events, with_actions=False):
    log = PreferenceLog()
    cues = ["pasta", "zoodles", "sauce", "easy", "fresh", "bolognese"]
    categories = [SB, Z, None]
    ts = {}
    for _ in range(n_events):
        session = f"s{rng.randint(0, 3)}"
        ts[session] = ts.get(session, 0) + rng.randint(0, 5)
        action = rng.choice(["select", "hover", "click_image"]) if with_actions else "select"
        log.record(
            PreferenceEvent(
                user=f"u{rng.randint(0, 2)}",
                session=session,
                cue_label=rng.choice(cues),
                category=rng.choice(categories),
                timestamp=ts[session],
                action=action,
            )
        )
    return log


class TestRecordPreference:
    def test_append_to_empty(self):
        log = PreferenceLog()
        record_preference(log, PreferenceEvent("u", "s", "pasta", timestamp=1))
        assert len(log) == 1

    def test_prior_events_untouched(self):
        log = PreferenceLog()
        first = PreferenceEvent("u", "s", "pasta", timestamp=1)
        log.record(first)
        log.record(PreferenceEvent("u", "s", "sauce", timestamp=2))
        assert log.events[0] is first

    def test_timestamp_regression_same_session_rejected(self):
        log = PreferenceLog()
        log.record(PreferenceEvent("u", "s", "pasta", timestamp=10))
        with pytest.raises(ValueError, match="regression"):
            log.record(PreferenceEvent("u", "s", "sauce", timestamp=9))

    def test_equal_timestamps_allowed(self):
        log = PreferenceLog()
        log.record(PreferenceEvent("u", "s", "pasta", timestamp=10))
        log.record(PreferenceEvent("u", "s", "sauce", timestamp=10))
        assert len(log) == 2

    def test_sessions_are_independent(self):
        log = PreferenceLog()
        log.record(PreferenceEvent("u", "s1", "pasta", timestamp=10))
        log.record(PreferenceEvent("u", "s2", "sauce", timestamp=3))
        assert len(log) == 2

    def test_empty_cue_label_rejected(self):
        with pytest.raises(ValueError):
            PreferenceEvent("u", "s", "", timestamp=1)

    def test_unknown_action_rejected(self):
        with pytest.raises(ValueError):
            PreferenceEvent("u", "s", "pasta", action="scroll")

    def test_hundred_appends_preserve_order(self):
        log = PreferenceLog()
        for i in range(100):
            log.record(PreferenceEvent("u", "s", f"cue{i}", timestamp=i))
        assert len(log) == 100
        assert [e.cue_label for e in log] == [f"cue{i}" for i in range(100)]


class TestFrequencies:
    def test_direct_count(self):
        log = PreferenceLog()
        for i in range(3):
            log.record(PreferenceEvent("u", "s", "bolognese", timestamp=i))
        log.record(PreferenceEvent("u", "s", "easy", timestamp=3))
        assert frequencies(log) == {"bolognese": 3, "easy": 1}

    def test_empty_log(self):
        assert frequencies(PreferenceLog()) == {}

    def test_hover_excluded_by_default(self):
        log = PreferenceLog()
        log.record(PreferenceEvent("u", "s", "pasta", timestamp=1, action="hover"))
        log.record(PreferenceEvent("u", "s", "pasta", timestamp=2))
        assert frequencies(log) == {"pasta": 1}
        wide = frequencies(log, counted_actions=frozenset({"select", "hover"}))
        assert wide == {"pasta": 2}

    def test_category_and_user_filters(self):
        log = PreferenceLog()
        log.record(PreferenceEvent("a", "s", "pasta", category=SB, timestamp=1))
        log.record(PreferenceEvent("b", "s", "pasta", category=Z, timestamp=2))
        assert frequencies(log, category=SB) == {"pasta": 1}
        assert frequencies(log, user="b") == {"pasta": 1}
        assert frequencies(log, category=SB, user="b") == {}

    def test_matches_brute_force_on_random_logs(self):
        rng = random.Random(99)
        for trial in range(5):
            log = random_log(rng, 2000, with_actions=True)
            for category in (SB, Z, None):
                got = frequencies(log, category=category)
                expected = Counter(
                    e.cue_label
                    for e in log.events
                    if e.action in DEFAULT_COUNTED_ACTIONS
                    and (category is None or e.category == category)
                )
                assert got == dict(expected)


class TestScaleScent:
    def test_bolognese_column(self):
        scores = scale_scent(SB_FREQS, scope_max=50)
        assert {c: s.scaled for c, s in scores.items()} == {
            "bolognese": 10,
            "spaghetti": 7,
            "recipe": 6,
            "sauce": 6,
            "easy": 3,
        }

    def test_zoodles_column_global_max(self):
        scores = scale_scent(Z_FREQS, scope_max=50)
        assert {c: s.scaled for c, s in scores.items()} == {
            "zoodles": 9,
            "zucchini": 8,
            "easy": 6,
            "pasta": 5,
            "chicken": 5,
        }

    def test_max_frequency_scores_ten(self):
        scores = scale_scent({"only": 7}, scope_max=7)
        assert scores["only"].scaled == 10

    def test_low_frequency_clamped_to_one(self):
        scores = scale_scent({"rare": 1, "common": 1000}, scope_max=1000)
        assert scores["rare"].scaled == 1

    def test_empty_freqs_rejected(self):
        with pytest.raises(ValueError):
            scale_scent({}, scope_max=10)

    def test_scope_max_below_observed_rejected(self):
        with pytest.raises(ValueError):
            scale_scent({"a": 5}, scope_max=4)

    def test_raw_frequency_carried_through(self):
        scores = scale_scent({"a": 5}, scope_max=10)
        assert scores["a"] == ScentScore("a", 5, 5)

    @given(
        st.dictionaries(
            st.text(alphabet="abcdef", min_size=1, max_size=4),
            st.integers(min_value=1, max_value=500),
            min_size=1,
            max_size=12,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_frequency(self, freqs):
        scope_max = max(freqs.values())
        scores = scale_scent(freqs, scope_max)
        ranked = sorted(freqs, key=freqs.__getitem__)
        for low, high in zip(ranked, ranked[1:]):
            assert scores[low].scaled <= scores[high].scaled
        for cue in freqs:
            assert 1 <= scores[cue].scaled <= 10
        top = max(freqs, key=freqs.__getitem__)
        assert scores[top].scaled == 10


class TestScentReport:
    def test_global_scope_reproduces_both_columns(self):
        report = scent_report(build_study_log(), [SB, Z], top_n=5, scope="global")
        by_name = {cat.category: cat for cat in report.categories}
        assert [s.scaled for _, s in by_name[SB].rows] == [10, 7, 6, 6, 3]
        assert [s.scaled for _, s in by_name[Z].rows] == [9, 8, 6, 5, 5]
        assert [label for label, _ in by_name[SB].rows] == [
            "bolognese",
            "spaghetti",
            "recipe",
            "sauce",
            "easy",
        ]

    def test_per_category_scope_rescales_zoodles(self):
        report = scent_report(build_study_log(), [SB, Z], top_n=5, scope="per_category")
        by_name = {cat.category: cat for cat in report.categories}
        assert [s.scaled for _, s in by_name[Z].rows] == [10, 9, 7, 6, 6]
        assert [s.scaled for _, s in by_name[SB].rows] == [10, 7, 6, 6, 3]

    def test_top_n_one_truncates(self):
        report = scent_report(build_study_log(), [SB, Z], top_n=1)
        assert all(len(cat.rows) == 1 for cat in report.categories)

    def test_empty_category_flagged(self):
        report = scent_report(build_study_log(), [SB, "Sushi"], top_n=5)
        sushi = next(c for c in report.categories if c.category == "Sushi")
        assert sushi.empty and sushi.rows == []

    def test_tie_break_is_label_ascending(self):
        report = scent_report(build_study_log(), [Z], top_n=5)
        rows = report.categories[0].rows
        # chicken and pasta tie at 25; chicken sorts first
        assert [label for label, _ in rows[3:]] == ["chicken", "pasta"]

    def test_permuted_log_yields_identical_report(self):
        log = build_study_log()
        events = list(log.events)
        random.Random(4).shuffle(events)
        # rebuild with fresh timestamps so per-session monotonicity holds
        shuffled = PreferenceLog()
        for i, event in enumerate(events):
            shuffled.record(
                PreferenceEvent(
                    event.user,
                    event.session,
                    event.cue_label,
                    category=event.category,
                    timestamp=i,
                    action=event.action,
                )
            )
        assert report_to_dict(
            scent_report(shuffled, [SB, Z], top_n=5)
        ) == report_to_dict(scent_report(log, [SB, Z], top_n=5))

    def test_invalid_scope_rejected(self):
        with pytest.raises(ValueError):
            scent_report(PreferenceLog(), [SB], top_n=5, scope="local")

    def test_table_format_carries_scent_columns(self):
        table = format_report_table(scent_report(build_study_log(), [SB, Z], top_n=5))
        lines = [line for line in table.splitlines() if line.startswith("R_")]
        assert [line.split("|")[2].strip() for line in lines] == [
            "10",
            "7",
            "6",
            "6",
            "3",
        ]
        assert [line.split("|")[4].strip() for line in lines] == [
            "9",
            "8",
            "6",
            "5",
            "5",
        ]


def make_item(labels):
    return ImageItem(
        id="x", cues=[Cue(label, "content", 1.0) for label in labels]
    )


class TestScentOfImage:
    def test_two_scored_cues(self):
        item = make_item(["bolognese", "easy"])
        scores = {
            "bolognese": ScentScore("bolognese", 50, 10),
            "easy": ScentScore("easy", 15, 3),
        }
        assert scent_of_image(item, scores) == pytest.approx(6.5)

    def test_no_scored_cues(self):
        assert scent_of_image(make_item(["pasta"]), {}) == 0.0

    def test_no_cues_at_all(self):
        assert scent_of_image(ImageItem(id="bare"), {"a": ScentScore("a", 1, 10)}) == 0.0

    def test_singleton_scored_ten(self):
        item = make_item(["pasta"])
        assert scent_of_image(item, {"pasta": ScentScore("pasta", 9, 10)}) == 10.0

    def test_adding_score_never_decreases(self):
        item = make_item(["bolognese", "easy", "sauce"])
        scores = {"bolognese": ScentScore("bolognese", 50, 10)}
        before = scent_of_image(item, scores)
        scores["easy"] = ScentScore("easy", 15, 3)
        assert scent_of_image(item, scores) >= before

    def test_permutation_invariant_over_cue_order(self):
        scores = {
            "a": ScentScore("a", 3, 4),
            "b": ScentScore("b", 2, 2),
        }
        assert scent_of_image(make_item(["a", "b", "c"]), scores) == scent_of_image(
            make_item(["c", "b", "a"]), scores
        )

    def test_max_and_sum_aggregations(self):
        item = make_item(["a", "b"])
        scores = {
            "a": ScentScore("a", 3, 4),
            "b": ScentScore("b", 2, 2),
        }
        assert scent_of_image(item, scores, aggregation="max") == 4.0
        assert scent_of_image(item, scores, aggregation="sum") == 6.0

    def test_unknown_aggregation_rejected(self):
        with pytest.raises(ValueError):
            scent_of_image(make_item(["a"]), {}, aggregation="median")


class TestJsonlRoundTrip:
    def test_round_trip_preserves_events(self):
        log = random_log(random.Random(5), 200, with_actions=True)
        buffer = io.StringIO()
        log.to_jsonl(buffer)
        buffer.seek(0)
        restored = PreferenceLog.from_jsonl(buffer)
        assert restored.events == log.events

    def test_fixture_log_loads(self, fixtures_dir):
        with open(fixtures_dir / "study_preferences.jsonl") as handle:
            log = PreferenceLog.from_jsonl(handle)
        assert len(log) == sum(SB_FREQS.values()) + sum(Z_FREQS.values())
        assert frequencies(log, category=SB) == SB_FREQS

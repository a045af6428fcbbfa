import random

import pytest

from relstat.credibility import CredibilityScore
from relstat.errors import ValidationError
from relstat.fusion import FusionConfig, normalize_cred_values, wam
from relstat.index import RankedList


def _ranked(pairs):
    return RankedList("t1", tuple(pairs))


class TestFusionConfig:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            FusionConfig(0.5, 0.6)

    def test_weights_must_be_in_unit_interval(self):
        with pytest.raises(ValidationError):
            FusionConfig(1.5, -0.5)


class TestWam:
    def test_direct_arithmetic(self):
        ranked = _ranked([("d1", 0.8)])
        fused = wam(ranked, {"d1": 0.4}, FusionConfig(0.5, 0.5))
        assert fused.items[0] == ("d1", pytest.approx(0.6))

    def test_pure_topicality_preserves_input_order(self):
        ranked = _ranked([("a", 1.0), ("b", 0.7), ("c", 0.1)])
        cred = {"a": 0.0, "b": 0.9, "c": 1.0}
        fused = wam(ranked, cred, FusionConfig(1.0, 0.0))
        assert fused.doc_ids() == ["a", "b", "c"]

    def test_pure_credibility_reproduces_cred_order(self):
        ranked = _ranked([("a", 1.0), ("b", 0.7), ("c", 0.1)])
        cred = {"a": 0.2, "b": 0.9, "c": 0.5}
        fused = wam(ranked, cred, FusionConfig(0.0, 1.0))
        assert fused.doc_ids() == ["b", "c", "a"]

    def test_four_doc_brute_force(self):
        ranked = _ranked([("a", 1.0), ("b", 0.8), ("c", 0.5), ("d", 0.0)])
        cred = {"a": 0.1, "b": 0.9, "c": 0.7, "d": 1.0}
        config = FusionConfig(0.7, 0.3)
        fused = wam(ranked, cred, config)
        expected = sorted(
            ((doc, 0.7 * top + 0.3 * cred[doc]) for doc, top in ranked.items),
            key=lambda p: (-p[1], p[0]))
        assert list(fused.items) == expected

    def test_missing_credibility_rejected(self):
        with pytest.raises(ValidationError, match="d1"):
            wam(_ranked([("d1", 0.5)]), {}, FusionConfig())

    def test_fused_in_convex_hull(self):
        rng = random.Random(19)
        for _ in range(50):
            doc_scores = [(f"d{i}", rng.random()) for i in range(6)]
            cred = {d: rng.random() for d, _ in doc_scores}
            wt = rng.random()
            fused = wam(_ranked(sorted(doc_scores, key=lambda p: (-p[1], p[0]))),
                        cred, FusionConfig(wt, 1.0 - wt))
            tops = dict(doc_scores)
            for doc, value in fused.items:
                lo = min(tops[doc], cred[doc]) - 1e-12
                hi = max(tops[doc], cred[doc]) + 1e-12
                assert lo <= value <= hi

    def test_compensation_is_observable(self):
        # a topical but non-credible page outranks a balanced one: the
        # compensatory failure mode aggregation cannot avoid
        ranked = _ranked([("clickbait", 1.0), ("balanced", 0.6)])
        cred = {"clickbait": 0.05, "balanced": 0.4}
        fused = wam(ranked, cred, FusionConfig(0.5, 0.5))
        assert fused.doc_ids()[0] == "clickbait"


class TestNormalizeCredValues:
    def _scores(self, values):
        return {f"d{i}": CredibilityScore("t", f"d{i}", v, ("e",))
                for i, v in enumerate(values)}

    def test_maps_to_unit_interval(self):
        normalized = normalize_cred_values(self._scores([-0.5, 0.0, 0.5]))
        assert sorted(normalized.values()) == [0.0, 0.5, 1.0]

    def test_constant_maps_to_one(self):
        normalized = normalize_cred_values(self._scores([0.3, 0.3]))
        assert set(normalized.values()) == {1.0}

    def test_empty(self):
        assert normalize_cred_values({}) == {}

    def test_order_preserved(self):
        values = [-0.9, -0.1, 0.2, 0.8]
        normalized = normalize_cred_values(self._scores(values))
        ranked = sorted(normalized, key=normalized.get)
        assert ranked == ["d0", "d1", "d2", "d3"]

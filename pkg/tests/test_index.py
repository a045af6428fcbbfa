import math
import random

import pytest

from relstat.corpus import Document, Topic
from relstat.errors import ValidationError
from relstat.index import (RankedList, bm25_score, build_index, load_index,
                           minmax_normalize, retrieve, save_index)
from relstat.tokenization import Tokenizer


def _docs(texts):
    return [Document(f"d{i}", t) for i, t in enumerate(texts)]


def _random_corpus(rng, n_docs, vocab_size=30, max_len=12):
    vocab = [f"w{i}" for i in range(vocab_size)]
    return [Document(f"d{i:03d}",
                     " ".join(rng.choices(vocab, k=rng.randint(1, max_len))))
            for i in range(n_docs)]


class TestBuildIndex:
    def test_two_doc_postings(self):
        idx = build_index(_docs(["a b", "b"]))
        assert idx.postings == {"a": [(0, 1)], "b": [(0, 1), (1, 1)]}
        assert idx.doc_count == 2
        assert idx.avg_doc_length == 1.5

    def test_repeated_term(self):
        idx = build_index(_docs(["x x x"]))
        assert idx.postings == {"x": [(0, 3)]}
        assert idx.avg_doc_length == 3

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValidationError):
            build_index([])

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValidationError):
            build_index([Document("d1", "a"), Document("d1", "b")])


class TestBM25Score:
    def test_no_overlap_is_zero(self):
        idx = build_index(_docs(["a b", "b"]))
        assert bm25_score(idx, ["zzz"], 0) == 0.0

    def test_hand_derived_value(self):
        # N=2, corpus ["a b", "b"], query [a], doc 0, k1=1.2, b=0.75:
        # idf = ln 2, tf = 1, dl = 2, avgdl = 1.5 -> ln2 * 2.2 / 2.5 = 0.6100
        idx = build_index(_docs(["a b", "b"]))
        score = bm25_score(idx, ["a"], 0, k1=1.2, b=0.75)
        assert abs(score - 0.6100) < 1e-4
        assert abs(score - math.log(2) * 2.2 / 2.5) < 1e-12

    def test_tf_monotonicity(self):
        low = build_index(_docs(["a b b b", "c"]))
        high = build_index(_docs(["a a b b", "c"]))  # same dl, doubled tf(a)
        assert (bm25_score(high, ["a"], 0) > bm25_score(low, ["a"], 0))

    def test_duplicate_query_terms_count_once(self):
        idx = build_index(_docs(["a b", "b"]))
        assert bm25_score(idx, ["a", "a"], 0) == bm25_score(idx, ["a"], 0)

    def test_unknown_ordinal_rejected(self):
        idx = build_index(_docs(["a"]))
        with pytest.raises(ValidationError):
            bm25_score(idx, ["a"], 5)

    def test_bad_params_rejected(self):
        idx = build_index(_docs(["a"]))
        with pytest.raises(ValidationError):
            bm25_score(idx, ["a"], 0, k1=0.0)
        with pytest.raises(ValidationError):
            bm25_score(idx, ["a"], 0, b=1.5)

    def test_non_negative_on_random_corpora(self):
        rng = random.Random(5)
        for _ in range(20):
            corpus = _random_corpus(rng, rng.randint(2, 30))
            idx = build_index(corpus)
            query = [f"w{rng.randint(0, 29)}" for _ in range(3)]
            for ordinal in range(idx.doc_count):
                assert bm25_score(idx, query, ordinal) >= 0.0


class TestRetrieve:
    def test_fewer_matches_than_n(self):
        idx = build_index(_docs(["a x", "a y", "a z", "q", "r"]))
        ranked = retrieve(idx, Topic("t1", "a"), n=500)
        assert len(ranked.items) == 3

    def test_ties_broken_by_doc_id(self):
        idx = build_index(_docs(["a", "a"]))  # identical docs, identical scores
        ranked = retrieve(idx, Topic("t1", "a"), n=10)
        assert ranked.doc_ids() == ["d0", "d1"]

    def test_equals_brute_force_on_random_corpus(self):
        rng = random.Random(17)
        for trial in range(5):
            corpus = _random_corpus(rng, 50)
            idx = build_index(corpus)
            query_text = " ".join(rng.choices([f"w{i}" for i in range(30)], k=4))
            topic = Topic("t", query_text)
            got = retrieve(idx, topic, n=10 ** 6)

            # oracle: score every document independently, drop zero-overlap docs
            tokens = idx.tokenizer.tokenize(query_text)
            expected = []
            for ordinal in range(idx.doc_count):
                score = bm25_score(idx, tokens, ordinal)
                if score > 0.0:
                    expected.append((idx.doc_table[ordinal], score))
            expected.sort(key=lambda p: (-p[1], p[0]))
            assert list(got.items) == expected

    def test_n_validated(self):
        idx = build_index(_docs(["a"]))
        with pytest.raises(ValidationError):
            retrieve(idx, Topic("t", "a"), n=0)


class TestMinMaxNormalize:
    def test_affine_map(self):
        ranked = RankedList("t", (("a", 4.0), ("b", 2.0), ("c", 0.0)))
        assert [s for _, s in minmax_normalize(ranked).items] == [1.0, 0.5, 0.0]

    def test_degenerate_all_ones(self):
        ranked = RankedList("t", (("a", 3.0), ("b", 3.0)))
        assert [s for _, s in minmax_normalize(ranked).items] == [1.0, 1.0]

    def test_order_preserved(self):
        rng = random.Random(3)
        scores = sorted((rng.uniform(-5, 5) for _ in range(20)), reverse=True)
        ranked = RankedList("t", tuple((f"d{i}", s) for i, s in enumerate(scores)))
        normalized = minmax_normalize(ranked)
        assert [d for d, _ in normalized.items] == [d for d, _ in ranked.items]
        values = [s for _, s in normalized.items]
        assert values == sorted(values, reverse=True)
        assert all(0.0 <= v <= 1.0 for v in values)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            minmax_normalize(RankedList("t", ()))


class TestSerialization:
    def test_round_trip(self, tmp_path):
        idx = build_index(_docs(["a b c", "b c", "c"]),
                          Tokenizer(stopwords=frozenset({"x"}), stemmer="porter"))
        path = tmp_path / "c.idx"
        save_index(idx, path)
        assert load_index(path) == idx

    def test_byte_identical_rebuild(self, tmp_path):
        rng = random.Random(23)
        corpus = _random_corpus(rng, 40)
        p1, p2 = tmp_path / "a.idx", tmp_path / "b.idx"
        save_index(build_index(corpus), p1)
        save_index(build_index(list(corpus)), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.idx"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ValidationError, match="magic"):
            load_index(path)

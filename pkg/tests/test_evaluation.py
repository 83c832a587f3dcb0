import math

import numpy as np
import pytest

from docrepair.evaluation import (
    ContrastiveInstance,
    bleu,
    change_stats,
    contrastive_accuracy,
    read_suite,
    write_suite,
)


def oracle_bleu(hypotheses, references, lowercase=True):
    """Independent brute-force BLEU: explicit n-gram dictionaries throughout."""
    if lowercase:
        hypotheses = [h.lower() for h in hypotheses]
        references = [r.lower() for r in references]
    hyp_len = sum(len(h.split()) for h in hypotheses)
    ref_len = sum(len(r.split()) for r in references)
    if hyp_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        match, total = 0, 0
        for h, r in zip(hypotheses, references):
            ht, rt = h.split(), r.split()
            hyp_grams = {}
            for i in range(len(ht) - n + 1):
                g = tuple(ht[i : i + n])
                hyp_grams[g] = hyp_grams.get(g, 0) + 1
            ref_grams = {}
            for i in range(len(rt) - n + 1):
                g = tuple(rt[i : i + n])
                ref_grams[g] = ref_grams.get(g, 0) + 1
            total += max(len(ht) - n + 1, 0)
            for g, c in hyp_grams.items():
                match += min(c, ref_grams.get(g, 0))
        if match == 0:
            return 0.0
        log_sum += math.log(match / total) / 4.0
    bp = math.exp(min(0.0, 1.0 - ref_len / hyp_len))
    return 100.0 * bp * math.exp(log_sum)


HAND_CORPORA = [
    (["a b c d e"], ["a b c d f"]),  # the worked 66.87 example
    (["a b c d"], ["x y z w"]),  # zero precision
    (["the cat sat on the mat"], ["the cat sat on the mat"]),
    (["the cat sat on the mat"], ["the cat sat on a mat"]),
    (["a b c d e f g"], ["a b c d e"]),  # long hypothesis
    (["a b c d"], ["a b c d e f"]),  # brevity penalty
    (["a a a a a"], ["a a b b b"]),  # clipping
    (["a b a b a b"], ["a b a b"]),
    (["one two three four five six"], ["one two three four five six seven"]),
    (["x"], ["x"]),  # too short for 4-grams
    (["a b c d", "e f g h"], ["a b c d", "e f g h"]),
    (["a b c d", "x y z w"], ["a b c d", "a b c d"]),
    (["a b c d e", "f g h i j"], ["a b c d x", "f g h i j"]),
    (["the quick brown fox jumps"], ["the quick brown dog jumps"]),
    (["to be or not to be"], ["to be or to not be"]),
    (["w w w w w w w w"], ["w w w w"]),
    (["m n o p q r"], ["m n o p q r"]),
    (["a b c d e f", "g h i j"], ["a b c d e f", "g h i j k l"]),
    (["s t u v w x y z"], ["s t u v w x y z"]),
    (["p q r s t"], ["p q r s t u v w x"]),
    (["A B C D E"], ["a b c d e"]),  # exercised with lowercase=True
]


class TestBleu:
    def test_identity_scores_100(self):
        assert bleu(["a b c d e"], ["a b c d e"]) == 100.0
        assert bleu(["x y z w", "p q r s"], ["x y z w", "p q r s"]) == 100.0

    def test_no_shared_fourgram_scores_zero(self):
        assert bleu(["a b c d e"], ["a b c x e"]) == 0.0

    def test_worked_example(self):
        # precisions 4/5, 3/4, 2/3, 1/2; BP = 1
        got = bleu(["a b c d e"], ["a b c d f"])
        expected = 100.0 * (4 / 5 * 3 / 4 * 2 / 3 * 1 / 2) ** 0.25
        np.testing.assert_allclose(got, expected, atol=1e-10)
        np.testing.assert_allclose(got, 66.87, atol=0.01)

    def test_hand_corpora_match_oracle(self):
        assert len(HAND_CORPORA) >= 20
        for hyps, refs in HAND_CORPORA:
            np.testing.assert_allclose(
                bleu(hyps, refs), oracle_bleu(hyps, refs), atol=0.01,
                err_msg=f"corpus {hyps} vs {refs}",
            )

    def test_randomized_corpora_match_oracle(self):
        rng = np.random.default_rng(0)
        vocab = list("abcdefg")
        for _ in range(50):
            n = int(rng.integers(1, 8))
            hyps = [" ".join(rng.choice(vocab, size=rng.integers(1, 12))) for _ in range(n)]
            refs = [" ".join(rng.choice(vocab, size=rng.integers(1, 12))) for _ in range(n)]
            np.testing.assert_allclose(bleu(hyps, refs), oracle_bleu(hyps, refs), atol=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        vocab = list("abcde")
        hyps = [" ".join(rng.choice(vocab, size=8)) for _ in range(10)]
        refs = [" ".join(rng.choice(vocab, size=8)) for _ in range(10)]
        base = bleu(hyps, refs)
        order = rng.permutation(10)
        shuffled = bleu([hyps[i] for i in order], [refs[i] for i in order])
        np.testing.assert_allclose(base, shuffled, atol=1e-12)

    def test_range(self):
        rng = np.random.default_rng(2)
        vocab = list("ab")
        for _ in range(50):
            hyps = [" ".join(rng.choice(vocab, size=rng.integers(1, 10)))]
            refs = [" ".join(rng.choice(vocab, size=rng.integers(1, 10)))]
            assert 0.0 <= bleu(hyps, refs) <= 100.0

    def test_lowercase_flag(self):
        assert bleu(["A B C D"], ["a b c d"], lowercase=True) == 100.0
        assert bleu(["A B C D"], ["a b c d"], lowercase=False) == 0.0

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            bleu([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            bleu(["a"], ["a", "b"])


def _instance(phenomenon="deixis", distance=1, marker="x", n_contrastive=1):
    true = ["ctx one", "ctx two", "ctx three", f"final {marker}"]
    contrastive = [
        ["ctx one", "ctx two", "ctx three", f"final wrong{i}"] for i in range(n_contrastive)
    ]
    return ContrastiveInstance(
        source=["s1", "s2", "s3", "s4"],
        context=true[:3],
        true_group=true,
        contrastive_groups=contrastive,
        phenomenon=phenomenon,
        distance=distance,
    )


class TestContrastiveAccuracy:
    def test_oracle_scorer_scores_one(self):
        instances = [_instance(distance=d) for d in (1, 2, 3)]

        def oracle(inst, group):
            return 1.0 if group == inst.true_group else 0.0

        report = contrastive_accuracy(instances, oracle)
        assert report.accuracy == 1.0

    def test_ties_count_as_failures(self):
        report = contrastive_accuracy([_instance()], lambda inst, group: 0.5)
        assert report.accuracy == 0.0

    def test_random_scorer_expectation(self):
        rng = np.random.default_rng(3)
        m = 4  # candidates per instance
        instances = [_instance(n_contrastive=m - 1) for _ in range(2000)]
        report = contrastive_accuracy(instances, lambda inst, group: rng.random())
        assert abs(report.accuracy - 1 / m) < 0.03

    def test_distance_rows_sum_to_phenomenon_totals(self):
        instances = (
            [_instance("deixis", d) for d in (1, 1, 2, 3)]
            + [_instance("lex_cohesion", d) for d in (2, 2, 3)]
            + [_instance("ellipsis_vp", None)]
        )
        rng = np.random.default_rng(4)
        report = contrastive_accuracy(instances, lambda inst, group: rng.random())
        for phen, (c, t) in report.by_phenomenon.items():
            dist = report.by_distance[phen]
            assert sum(ct for _, ct in dist.values()) == t
            assert sum(cc for cc, _ in dist.values()) == c
        assert report.by_phenomenon["deixis"][1] == 4
        assert report.by_distance["deixis"][1][1] == 2

    def test_union_accuracy_is_weighted_mean(self):
        rng = np.random.default_rng(5)
        set_a = [_instance("deixis", 1, marker=str(i)) for i in range(40)]
        set_b = [_instance("lex_cohesion", 2, marker=str(i)) for i in range(60)]

        def scorer(inst, group):
            return float(len(group[-1]) + (group == inst.true_group) * rng.integers(0, 2))

        ra = contrastive_accuracy(set_a, scorer)
        rb = contrastive_accuracy(set_b, scorer)
        runion = contrastive_accuracy(set_a + set_b, scorer)
        weighted = (ra.correct + rb.correct) / (ra.total + rb.total)
        np.testing.assert_allclose(runion.accuracy, weighted, atol=1e-12)

    def test_reproducible_with_deterministic_scorer(self):
        instances = [_instance(distance=d) for d in (1, 2, 3)]

        def scorer(inst, group):
            return -float(len(" ".join(group)))

        a = contrastive_accuracy(instances, scorer).to_dict()
        b = contrastive_accuracy(instances, scorer).to_dict()
        assert a == b

    def test_zero_contrastive_rejected(self):
        with pytest.raises(ValueError):
            ContrastiveInstance(["s"], [], ["t"], [], "deixis", 1)

    def test_unknown_phenomenon_rejected(self):
        with pytest.raises(ValueError):
            ContrastiveInstance(["s"], [], ["t"], [["c"]], "sarcasm", 1)

    def test_candidate_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ContrastiveInstance(["s"], [], ["t", "u"], [["c"]], "deixis", 1)

    def test_table_layout(self):
        instances = [_instance("deixis", d) for d in (1, 2)] + [
            _instance("ellipsis_infl", None)
        ]
        report = contrastive_accuracy(instances, lambda i, g: 1.0 if g == i.true_group else 0.0)
        table = report.format_table()
        assert "deixis" in table and "d=1" in table and "overall" in table


class TestSuiteIO:
    def test_roundtrip(self, tmp_path):
        instances = [_instance("deixis", 1), _instance("ellipsis_vp", None)]
        path = tmp_path / "suite.jsonl"
        write_suite(instances, path)
        loaded = read_suite(path)
        assert [i.to_dict() for i in loaded] == [i.to_dict() for i in instances]

    def test_bad_record_rejected_with_location(self, tmp_path):
        path = tmp_path / "suite.jsonl"
        path.write_text('{"source": ["s"], "context": [], "true": ["t"], '
                        '"contrastive": [["c"]], "phenomenon": "nope", "distance": 1}\n')
        with pytest.raises(ValueError, match="suite.jsonl:1"):
            read_suite(path)


class TestChangeStats:
    def _groups(self, n=10, k=4):
        return [[f"g{i} s{j} tok tok tok" for j in range(k)] for i in range(n)]

    def test_identical_everywhere(self):
        groups = self._groups()
        stats = change_stats(groups, groups, groups)
        assert stats.histogram[0] == 10
        assert all(v == 0 for c, v in stats.histogram.items() if c > 0)
        assert stats.unchanged_fraction == 1.0
        assert stats.bleu_vs_baseline == 100.0

    def test_exactly_one_changed_per_group(self):
        base = self._groups()
        repaired = [list(g) for g in base]
        for g in repaired:
            g[2] = g[2] + " changed"
        stats = change_stats(base, repaired, base)
        assert stats.histogram[1] == 10
        assert stats.unchanged_fraction == 0.0

    def test_histogram_sums_to_group_count(self):
        rng = np.random.default_rng(6)
        base = self._groups(30)
        repaired = [
            [s + " x" if rng.random() < 0.4 else s for s in g] for g in base
        ]
        stats = change_stats(base, repaired, base)
        assert sum(stats.histogram.values()) == 30

    def test_whitespace_normalization_not_a_change(self):
        base = [["a b c", "d e f"]]
        repaired = [["a  b   c", "d e f"]]
        stats = change_stats(base, repaired, base)
        assert stats.histogram[0] == 1

    def test_group_order_permutation_invariance(self):
        rng = np.random.default_rng(7)
        base = self._groups(20)
        repaired = [
            [s + " y" if rng.random() < 0.3 else s for s in g] for g in base
        ]
        stats = change_stats(base, repaired, base)
        order = list(rng.permutation(20))
        permuted = change_stats(
            [base[i] for i in order], [repaired[i] for i in order], [base[i] for i in order]
        )
        assert stats.histogram == permuted.histogram

    def test_misaligned_lengths_rejected(self):
        with pytest.raises(ValueError):
            change_stats(self._groups(3), self._groups(2), self._groups(3))

import json

import numpy as np
import pytest

import costsight.anova as anova_mod
from costsight import GroupedAnswers, bootstrap_p, f_statistic
from costsight.errors import (
    InsufficientData,
    InvalidShuffleCount,
    ZeroWithinVariance,
)
from costsight.ingest import generate_answers

from conftest import make_answer


def straight_formula_f(group, target, levels, n_classes=6):
    """Independent reimplementation with plain loops over the raw indices.

    ``levels[i][j]`` is the exponent answer i gave for confused class j
    (0-based); the entry at j == target[i] is absent (None).
    """
    n_total = len(group)
    # cell means per (l, k, j)
    cell_values = {}
    for i in range(n_total):
        for j in range(n_classes):
            if j == target[i]:
                continue
            cell_values.setdefault((group[i], target[i], j), []).append(
                levels[i][j]
            )
    pooled_values = {}
    for (l, k, j), vals in cell_values.items():
        pooled_values.setdefault((k, j), []).extend(vals)
    ms_b = 0.0
    for (l, k, j), vals in cell_values.items():
        cell_mean = sum(vals) / len(vals)
        pooled = pooled_values[(k, j)]
        pooled_mean = sum(pooled) / len(pooled)
        ms_b += len(vals) * (cell_mean - pooled_mean) ** 2
    df = n_total - 2 * n_classes * (n_classes - 1)
    wss = 0.0
    for (l, k, j), vals in cell_values.items():
        cell_mean = sum(vals) / len(vals)
        wss += sum((v - cell_mean) ** 2 for v in vals)
    ms_w = wss / df
    return ms_b, ms_w, (ms_b / ms_w if ms_w > 0 else 0.0)


def random_corpus(rng, n, n_classes=6, level_range=(0, 7)):
    group = rng.integers(0, 2, size=n)
    target = rng.integers(0, n_classes, size=n)
    levels = np.zeros((n, n_classes))
    raw = []
    for i in range(n):
        row = {}
        for j in range(n_classes):
            if j == target[i]:
                continue
            v = int(rng.integers(*level_range))
            levels[i, j] = v
            row[j] = v
        raw.append(row)
    # make sure both groups are populated
    group[0], group[1] = 0, 1
    g = GroupedAnswers(group, target, levels, labels=("g0", "g1"),
                       n_classes=n_classes)
    return g, group.tolist(), target.tolist(), raw


class TestFStatistic:
    def test_matches_straight_formula_on_20_corpora(self, rng):
        for _ in range(20):
            n = int(rng.integers(100, 501))
            g, group, target, raw = random_corpus(rng, n)
            ms_b, ms_w, f = f_statistic(g)
            ob, ow, of = straight_formula_f(group, target, raw)
            assert ms_b == pytest.approx(ob, rel=1e-10)
            assert ms_w == pytest.approx(ow, rel=1e-10)
            assert f == pytest.approx(of, rel=1e-10)

    def test_identical_multisets_give_exact_zero(self, rng):
        # same answers in both groups (with within-cell noise) -> MS_B = 0
        n_half = 100
        target_half = rng.integers(0, 6, size=n_half)
        levels_half = rng.integers(0, 7, size=(n_half, 6)).astype(float)
        for i in range(n_half):
            levels_half[i, target_half[i]] = 0.0
        g = GroupedAnswers(
            np.repeat([0, 1], n_half),
            np.concatenate([target_half, target_half]),
            np.concatenate([levels_half, levels_half]),
            labels=("a", "b"),
        )
        ms_b, ms_w, f = f_statistic(g)
        assert ms_b == 0.0
        assert f == 0.0
        assert ms_w > 0.0

    def test_zero_within_variance_raises(self):
        # 31 answers per group, all target class 1; group means differ but
        # every cell is constant
        answers = [make_answer(1, 2, perspective="passenger")] * 31 \
            + [make_answer(1, 4, perspective="external")] * 31
        g = GroupedAnswers.from_answers(answers, "perspective")
        with pytest.raises(ZeroWithinVariance):
            f_statistic(g)

    def test_insufficient_data(self):
        answers = [make_answer(1, 2, perspective="passenger")] * 30 \
            + [make_answer(1, 3, perspective="external")] * 30
        g = GroupedAnswers.from_answers(answers, "perspective")
        with pytest.raises(InsufficientData):
            f_statistic(g)

    def test_group_swap_symmetry(self, rng):
        g, *_ = random_corpus(rng, 300)
        swapped = GroupedAnswers(
            1 - g.group, g.target, g.levels, labels=g.labels[::-1]
        )
        assert f_statistic(g) == f_statistic(swapped)

    def test_level_shift_invariance(self, rng):
        g, *_ = random_corpus(rng, 250, level_range=(1, 5))
        shifted_levels = np.array(g.levels)
        off_target = shifted_levels != 0
        for i in range(g.n_answers):
            for j in range(6):
                if j != g.target[i]:
                    shifted_levels[i, j] += 1.5
        shifted = GroupedAnswers(g.group, g.target, shifted_levels, g.labels)
        a = f_statistic(g)
        b = f_statistic(shifted)
        assert a[2] == pytest.approx(b[2], rel=1e-9)

    def test_empty_stratum_for_one_group_tolerated(self, rng):
        # group 1 never rates target class 0; its cells contribute nothing
        g, group, target, raw = random_corpus(rng, 200)
        keep = ~((np.array(group) == 1) & (np.array(target) == 0))
        g2 = GroupedAnswers(
            g.group[keep], g.target[keep], g.levels[keep], g.labels
        )
        ms_b, ms_w, f = f_statistic(g2)
        kept_idx = np.nonzero(keep)[0]
        ob, ow, of = straight_formula_f(
            [group[i] for i in kept_idx],
            [target[i] for i in kept_idx],
            [raw[i] for i in kept_idx],
        )
        assert f == pytest.approx(of, rel=1e-10)


class TestGroupedAnswers:
    def test_from_answers_excludes_missing_attribute(self):
        answers = [
            make_answer(1, 2, gender="female"),
            make_answer(2, 3, gender="male"),
            make_answer(3, 4, gender=None),
        ]
        g = GroupedAnswers.from_answers(answers, "gender")
        assert g.n_answers == 2
        assert g.labels == ("female", "male")

    def test_explicit_labels_filter(self):
        answers = [
            make_answer(1, 2, gender="female"),
            make_answer(2, 3, gender="male"),
            make_answer(3, 4, gender="nonbinary"),
        ]
        g = GroupedAnswers.from_answers(answers, "gender",
                                        labels=("female", "male"))
        assert g.n_answers == 2

    def test_gender_split_is_binary_by_convention(self):
        answers = [
            make_answer(1, 2, gender="female"),
            make_answer(2, 3, gender="male"),
            make_answer(3, 4, gender="nonbinary"),
        ]
        g = GroupedAnswers.from_answers(answers, "gender")
        assert g.labels == ("female", "male")
        assert g.n_answers == 2

    def test_three_values_without_labels_is_an_error(self):
        answers = [
            make_answer(1, 2, transport="bike"),
            make_answer(2, 3, transport="car"),
            make_answer(3, 4, transport="tram"),
        ]
        with pytest.raises(ValueError, match="labels"):
            GroupedAnswers.from_answers(answers, "transport")

    def test_cell_counts(self):
        answers = [make_answer(1, 2, perspective="passenger")] * 3 \
            + [make_answer(2, 3, perspective="external")] * 5
        g = GroupedAnswers.from_answers(answers, "perspective")
        counts = g.cell_counts
        assert counts[0, 0] == 3
        assert counts[1, 1] == 5
        assert counts.sum() == 8

    def test_group_cell_means_match_aggregation(self):
        answers = [make_answer(1, 2, perspective="passenger"),
                   make_answer(1, 4, perspective="passenger"),
                   make_answer(1, 6, perspective="external")]
        g = GroupedAnswers.from_answers(answers, "perspective")
        means = g.group_cell_means
        assert means[0, 1, 0] == 3.0   # passenger, predicted 1, true 0
        assert means[1, 1, 0] == 6.0
        assert np.isnan(means[0, 0, 0])


class TestBootstrap:
    def _corpus(self, shift, seed=7, n_per_group=120):
        answers = generate_answers(
            {"passenger": n_per_group, "external": n_per_group},
            seed=seed,
            group_shift={"external": shift},
            within_sd=1.0,
        )
        return GroupedAnswers.from_answers(answers, "perspective")

    def test_separated_groups_give_small_p(self):
        g = self._corpus(shift=2.0)
        res = bootstrap_p(g, shuffles=2000, seed=42)
        assert res.p_value < 0.01
        assert res.exceed_count == res.p_value * res.shuffles

    def test_null_groups_give_unremarkable_p(self):
        g = self._corpus(shift=0.0)
        res = bootstrap_p(g, shuffles=500, seed=42)
        assert res.p_value > 0.01

    def test_deterministic_given_seed(self):
        g = self._corpus(shift=0.0)
        a = bootstrap_p(g, shuffles=400, seed=9)
        b = bootstrap_p(g, shuffles=400, seed=9)
        assert a.to_dict() == b.to_dict()
        c = bootstrap_p(g, shuffles=400, seed=10)
        assert c.exceed_count != a.exceed_count

    def test_batch_size_does_not_change_results(self, monkeypatch):
        g = self._corpus(shift=0.5)
        base = bootstrap_p(g, shuffles=300, seed=11)
        for batch in (1, 7, 64):
            monkeypatch.setattr(anova_mod, "_BATCH", batch)
            again = bootstrap_p(g, shuffles=300, seed=11)
            assert again.to_dict() == base.to_dict()

    def test_per_target_mode_preserves_cell_counts(self):
        g = self._corpus(shift=0.0)
        strata = anova_mod._Strata(g)
        labels = anova_mod._shuffled_labels(g, strata, seed=3, i=5,
                                            mode="per_target")
        for k in range(6):
            sel = g.target == k
            assert (labels[sel] == 0).sum() == (g.group[sel] == 0).sum()
        res = bootstrap_p(g, shuffles=50, seed=3, mode="per_target")
        assert res.shuffle_mode == "per_target"

    def test_all_identical_answers_give_p_zero(self):
        answers = [make_answer(1, 3, perspective="passenger")] * 40 \
            + [make_answer(1, 3, perspective="external")] * 40
        g = GroupedAnswers.from_answers(answers, "perspective")
        res = bootstrap_p(g, shuffles=100, seed=1)
        assert res.f == 0.0
        assert res.exceed_count == 0
        assert res.p_value == 0.0

    def test_invalid_shuffle_count(self):
        g = self._corpus(shift=0.0)
        with pytest.raises(InvalidShuffleCount):
            bootstrap_p(g, shuffles=0, seed=1)

    def test_result_serializes_to_json(self):
        g = self._corpus(shift=1.0)
        res = bootstrap_p(g, shuffles=50, seed=5)
        blob = json.dumps(res.to_dict())
        parsed = json.loads(blob)
        assert parsed["shuffles"] == 50
        assert parsed["shuffle_mode"] == "pooled"
        assert len(parsed["group_means"]) == 2
        # group means let a consumer recompute MS_B
        counts = np.array(parsed["cell_counts"], dtype=float)
        means = np.array([
            [[np.nan if v is None else v for v in row] for row in grid]
            for grid in parsed["group_means"]
        ])
        ms_b = 0.0
        for k in range(6):
            for j in range(6):
                if j == k or np.isnan(means[0, j, k]) or np.isnan(means[1, j, k]):
                    continue
                n0, n1 = counts[0, k], counts[1, k]
                pooled = (n0 * means[0, j, k] + n1 * means[1, j, k]) / (n0 + n1)
                ms_b += n0 * (means[0, j, k] - pooled) ** 2
                ms_b += n1 * (means[1, j, k] - pooled) ** 2
        assert ms_b == pytest.approx(parsed["ms_between"], rel=1e-9)

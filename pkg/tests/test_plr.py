import itertools
import logging
import math
from fractions import Fraction

import pytest

from irsa_flpa.errors import BudgetExceeded, ConfigError
from irsa_flpa.model import DegreeDistribution, SystemConfig
from irsa_flpa.plr import (
    PlrReport,
    complexity_estimate,
    conditional_pmf,
    exact_plr,
    mlv_plr,
    oracle_conditional_pmf,
    oracle_plr,
    render,
)

F = Fraction


def test_conditional_pmf_examples():
    cfg = SystemConfig(2, 2)
    assert conditional_pmf([1, 1], cfg) == {0: F(1, 2), 2: F(1, 2)}
    assert conditional_pmf([1, 1], cfg) == oracle_conditional_pmf([1, 1], 2)
    assert conditional_pmf([2, 2], cfg) == {0: 0, 2: 1}
    with pytest.raises(ConfigError):
        conditional_pmf([3, 1], cfg)


def test_reference_values_exact(ref_dist):
    rep = exact_plr(ref_dist, SystemConfig(4, 6))
    r = rep.rendered(6)
    assert (r["pmf(2)"], r["pmf(3)"], r["pmf(4)"], r["P_L"]) == ("0.140730", "0.130158", "0.094203", "0.262186")
    assert sum(rep.pmf.values()) == 1
    assert rep.coverage == 1


def test_single_user_never_lost():
    for t in (1, 3, 5):
        for spec in ("1:1", "1:1/2,2:1/2"):
            lam = DegreeDistribution.parse(spec)
            if max(lam.support) <= t:
                assert exact_plr(lam, SystemConfig(1, t)).plr == 0
    assert oracle_plr(DegreeDistribution({3: 1}), SystemConfig(1, 3)).plr == 0


def test_two_users_two_slots():
    lam = DegreeDistribution({1: 1})
    cfg = SystemConfig(2, 2)
    assert exact_plr(lam, cfg).plr == F(1, 2)
    assert oracle_plr(lam, cfg).plr == F(1, 2)


def test_oracle_agrees_three_users_degree_two():
    lam = DegreeDistribution({2: 1})
    cfg = SystemConfig(3, 4)
    assert exact_plr(lam, cfg).pmf == oracle_plr(lam, cfg).pmf


@pytest.mark.parametrize("spec", ["1:1/2,2:1/2", "1:0.2,2:0.5,3:0.3", "2:0.25,3:0.75"])
@pytest.mark.parametrize("k, t", [(2, 3), (3, 3), (3, 5), (4, 4)])
def test_exact_equals_oracle(spec, k, t):
    lam = DegreeDistribution.parse(spec)
    cfg = SystemConfig(k, t)
    exact = exact_plr(lam, cfg)
    oracle = oracle_plr(lam, cfg)
    assert exact.pmf == oracle.pmf
    assert exact.plr == oracle.plr


def test_weighted_identity(ref_dist):
    rep = exact_plr(ref_dist, SystemConfig(4, 6))
    assert rep.plr == F(2, 4) * rep.pmf[2] + F(3, 4) * rep.pmf[3] + rep.pmf[4]
    assert 0 <= rep.plr <= 1
    assert 0 <= rep.throughput <= 4 / 6


def test_conditional_pmf_permutation_invariant():
    cfg = SystemConfig(4, 5)
    base = conditional_pmf((1, 2, 3, 3), cfg)
    for perm in set(itertools.permutations((1, 2, 3, 3))):
        assert conditional_pmf(perm, cfg) == base


def test_mlv_threshold_zero_is_exact(mixed_dist):
    cfg = SystemConfig(5, 6)
    ex = exact_plr(mixed_dist, cfg)
    ml = mlv_plr(mixed_dist, cfg, 0)
    assert ml.pmf == ex.pmf and ml.plr == ex.plr and ml.coverage == 1


def test_mlv_threshold_one_covers_nothing(mixed_dist, caplog):
    with caplog.at_level(logging.WARNING):
        rep = mlv_plr(mixed_dist, SystemConfig(3, 6), 1)
    assert rep.coverage == 0 and rep.pmf == {} and rep.plr == 0
    assert "coverage 0" in caplog.text


def test_mlv_mass_accounting(mixed_dist):
    cfg = SystemConfig(5, 6)
    ex = exact_plr(mixed_dist, cfg)
    ml = mlv_plr(mixed_dist, cfg, "1/1000")
    assert ml.coverage < 1
    assert sum(ml.pmf.values()) == ml.coverage
    assert ml.plr_lower_bound <= ex.plr
    assert ml.plr == ml.plr_lower_bound / ml.coverage
    assert ml.stats["classes_evaluated"] < ml.stats["classes_total"]
    for u in ex.pmf:
        assert ml.pmf[u] <= ex.pmf[u]


def test_mlv_coverage_monotone(mixed_dist):
    cfg = SystemConfig(5, 6)
    thresholds = [F(0), F(1, 10000), F(1, 1000), F(1, 100), F(1, 20), F(1, 2)]
    covs = [mlv_plr(mixed_dist, cfg, th).coverage for th in thresholds]
    assert covs == sorted(covs, reverse=True)
    with pytest.raises(ConfigError):
        mlv_plr(mixed_dist, cfg, 2)


def test_parallel_equals_serial(mixed_dist):
    cfg = SystemConfig(4, 6)
    assert exact_plr(mixed_dist, cfg, workers=3).pmf == exact_plr(mixed_dist, cfg).pmf


def test_oracle_budget():
    lam = DegreeDistribution.parse("2:0.25,3:0.75")
    with pytest.raises(BudgetExceeded):
        oracle_plr(lam, SystemConfig(4, 6), budget=1000)


def test_exact_mode_k_cap(ref_dist):
    with pytest.raises(ConfigError):
        exact_plr(ref_dist, SystemConfig(4, 6), max_k=3)


def test_degree_larger_than_frame_rejected(mixed_dist):
    with pytest.raises(ConfigError):
        exact_plr(mixed_dist, SystemConfig(2, 3))


def test_complexity_estimates():
    lam3 = DegreeDistribution.parse("1:0.2,2:0.5,4:0.3")
    assert complexity_estimate(lam3, SystemConfig(5, 6))["num_degree_vectors"] == 243
    est = complexity_estimate(DegreeDistribution({1: 1}), SystemConfig(2, 2))
    assert est["reduced_patterns"] == 1 and est["occupancy_bound"] == 1
    est = complexity_estimate(lam3, SystemConfig(4, 6))
    assert est["reduced_patterns"] == 1 + 4 + 6
    assert est["occupancy_bound"] == math.comb(16, 6) == 8008


def test_render_half_even():
    assert render(F(1, 8), 2) == "0.12"
    assert render(F(3, 8), 2) == "0.38"
    assert render(F(1, 3), 0) == "0"
    assert render(F(-1, 4), 1) == "-0.2"
    assert render(0.5, 3) == "0.500"


def test_report_throughput():
    rep = PlrReport(4, 6, "exact", {0: F(1, 2), 2: F(1, 2)})
    assert rep.plr == F(1, 4)
    assert rep.throughput == pytest.approx(0.5)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from titest import (
    DecisionRule,
    DiscreteJointModel,
    PosteriorColumn,
    build_coin_model,
    build_constant_model,
    decide,
    decide_eap,
    decide_map,
    decide_meap,
    decide_sap,
    error_probability,
    inverse_cdf_pick,
    posterior,
    sap_sample,
)


def column(labels, probs):
    return PosteriorColumn(y=0, labels=tuple(labels), probs=np.array(probs, dtype=float))


@st.composite
def posterior_columns(draw):
    n = draw(st.integers(2, 7))
    weights = draw(
        st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda w: sum(w) > 0.01)
    )
    probs = [w / sum(weights) for w in weights]
    labels = draw(
        st.lists(st.integers(-50, 50), min_size=n, max_size=n, unique=True)
    )
    return column(labels, probs)


class TestRuleEnum:
    def test_from_name_case_insensitive(self):
        assert DecisionRule.from_name("MeAP") is DecisionRule.MEAP

    def test_unknown_rule_lists_valid(self):
        with pytest.raises(ValueError, match="map, eap, meap, sap"):
            DecisionRule.from_name("mle")

    def test_only_sap_is_stochastic(self):
        assert DecisionRule.SAP.is_stochastic
        assert not any(
            r.is_stochastic for r in (DecisionRule.MAP, DecisionRule.EAP, DecisionRule.MEAP)
        )


class TestFrozenDecisions:
    """Pinned single-observation decisions for the coin model N=35, theta=0.4."""

    @pytest.mark.parametrize(
        "k,want_map,want_eap,want_meap",
        [(3, 7, 10, 8), (9, 22, 27, 23), (13, 32, 28, 29)],
    )
    def test_triplets(self, coin35, k, want_map, want_eap, want_meap):
        post = posterior(coin35, k)
        assert decide_map(post) == want_map
        assert decide_eap(post) == want_eap
        assert decide_meap(post) == want_meap


class TestMap:
    def test_tie_breaks_to_lowest_label(self):
        assert decide_map(column([2, 1], [0.5, 0.5])) == 1

    def test_point_mass(self):
        assert decide_map(column([3, 4, 5], [0.0, 1.0, 0.0])) == 4

    @given(posterior_columns())
    @settings(max_examples=100, deadline=None)
    def test_argmax_property(self, post):
        chosen = decide_map(post)
        idx = list(post.labels).index(chosen)
        assert post.probs[idx] == np.asarray(post.probs).max()


class TestEap:
    def test_point_mass(self):
        assert decide_eap(column([3, 5, 9], [0.0, 1.0, 0.0])) == 5

    def test_uniform_ties_to_lowest(self):
        assert decide_eap(column([4, 5, 6, 7], [0.25] * 4)) == 4

    def test_reference_point_is_mean_posterior_mass(self):
        # E[p] = 0.36 + 0.04 + 0.04 + 0.04 = 0.48; p=0.6 sits 0.12 away,
        # every p=0.2 sits 0.28 away, so the mode wins here
        assert decide_eap(column([1, 2, 3, 4], [0.6, 0.2, 0.1, 0.1])) == 1

    @given(posterior_columns())
    @settings(max_examples=100, deadline=None)
    def test_always_in_support(self, post):
        chosen = decide_eap(post)
        assert post.probs[list(post.labels).index(chosen)] > 0


class TestMeap:
    def test_exact_median_hit(self):
        assert decide_meap(column([1, 2, 3], [0.2, 0.3, 0.5])) == 2

    def test_point_mass(self):
        assert decide_meap(column([0, 5, 9], [0.0, 1.0, 0.0])) == 5

    def test_one_hot_never_picks_zero_prob_label(self):
        assert decide_meap(column([0, 1, 2, 3], [0.0, 0.0, 1.0, 0.0])) == 2

    @given(posterior_columns())
    @settings(max_examples=100, deadline=None)
    def test_always_in_support(self, post):
        chosen = decide_meap(post)
        assert post.probs[list(post.labels).index(chosen)] > 0


class TestInverseCdfPick:
    def test_boundary_steps_to_next_point(self):
        cdf = np.array([0.3, 0.7, 1.0])
        assert inverse_cdf_pick(cdf, np.array([0.3]))[0] == 1
        assert inverse_cdf_pick(cdf, np.array([0.2999999]))[0] == 0
        assert inverse_cdf_pick(cdf, np.array([0.0]))[0] == 0
        assert inverse_cdf_pick(cdf, np.array([0.99999999]))[0] == 2

    def test_clip_guards_terminal_rounding(self):
        # a cdf that tops out just below 1 must still be indexable
        cdf = np.array([0.5, 1.0 - 1e-16])
        assert inverse_cdf_pick(cdf, np.array([1.0 - 1e-17]))[0] == 1

    def test_matrix_rows(self):
        cdf = np.array([[0.5, 1.0], [0.1, 1.0]])
        got = inverse_cdf_pick(cdf, np.array([0.4, 0.4]))
        np.testing.assert_array_equal(got, [0, 1])


class TestSap:
    def test_point_mass_any_u(self):
        post = column([2, 7], [0.0, 1.0])
        rng = np.random.default_rng(0)
        assert all(decide_sap(post, rng) == 7 for _ in range(20))

    def test_zero_prob_label_never_drawn(self):
        post = column([1, 2, 3], [0.5, 0.0, 0.5])
        draws = sap_sample(post, np.random.default_rng(3), 4000)
        assert set(draws.tolist()) == {1, 3}

    def test_uniform_frequencies_within_3_sigma(self):
        post = column([0, 1, 2, 3], [0.25] * 4)
        draws = sap_sample(post, np.random.default_rng(11), 1_000_000)
        for label in range(4):
            freq = (draws == label).mean()
            assert abs(freq - 0.25) < 0.002

    def test_seeded_stream_reproducible(self, coin35):
        post = posterior(coin35, 3)
        a = sap_sample(post, np.random.default_rng(42), 50)
        b = sap_sample(post, np.random.default_rng(42), 50)
        np.testing.assert_array_equal(a, b)

    def test_total_variation_converges(self):
        # TV between empirical frequencies and the posterior at R = 2*10^5
        probs = np.array([0.05, 0.1, 0.15, 0.3, 0.4])
        post = column(range(5), probs)
        draws = sap_sample(post, np.random.default_rng(5), 200_000)
        emp = np.array([(draws == i).mean() for i in range(5)])
        tv = 0.5 * np.abs(emp - probs).sum()
        assert tv < 3 * np.sqrt(len(probs) / 200_000)


class TestDecideDispatcher:
    def test_routes_all_rules(self, coin35):
        post = posterior(coin35, 9)
        assert decide(DecisionRule.MAP, post) == 22
        assert decide(DecisionRule.EAP, post) == 27
        assert decide(DecisionRule.MEAP, post) == 23
        assert decide(DecisionRule.SAP, post, np.random.default_rng(0)) in range(9, 36)

    def test_sap_without_rng_raises(self, coin35):
        with pytest.raises(ValueError):
            decide(DecisionRule.SAP, posterior(coin35, 9))


class TestErrorProbability:
    def test_identity_channel_is_exact_zero(self, identity4):
        for rule in DecisionRule:
            assert error_probability(identity4, rule) == pytest.approx(0.0, abs=1e-12)

    def test_constant_channel_uniform(self):
        model = build_constant_model(5)
        # posterior equals the uniform prior, so both formulas give 1 - 1/N
        assert error_probability(model, DecisionRule.MAP) == pytest.approx(0.8, abs=1e-12)
        assert error_probability(model, DecisionRule.SAP) == pytest.approx(0.8, abs=1e-12)

    def test_coin10_map_optimality(self, coin10):
        p_map = error_probability(coin10, DecisionRule.MAP)
        assert p_map <= error_probability(coin10, DecisionRule.EAP) + 1e-12
        assert p_map <= error_probability(coin10, DecisionRule.MEAP) + 1e-12
        assert p_map <= error_probability(coin10, DecisionRule.SAP) + 1e-12

    def test_matches_monte_carlo(self, coin10):
        # independent MC estimate of single-symbol error for each rule
        rng = np.random.default_rng(2024)
        r = 40_000
        xs = rng.choice(10, size=r, p=coin10.prior)
        u = rng.random(r)
        lik_cdf = np.cumsum(coin10.likelihood, axis=1)
        ys = (lik_cdf[xs] <= u[:, None]).sum(axis=1)
        for rule in DecisionRule:
            exact = error_probability(coin10, rule)
            if rule.is_stochastic:
                post_cols = coin10.posterior_matrix[:, ys].T
                cdf = np.cumsum(post_cols, axis=1)
                decided = (cdf <= rng.random(r)[:, None]).sum(axis=1)
                decided = np.minimum(decided, 9)
            else:
                table = np.array(
                    [
                        list(coin10.hypothesis_values).index(
                            decide(rule, posterior(coin10, k))
                        )
                        for k in coin10.observation_values
                    ]
                )
                decided = table[ys]
            mc = (decided != xs).mean()
            sigma = np.sqrt(exact * (1 - exact) / r)
            assert abs(mc - exact) < 4 * sigma + 1e-9, rule

    def test_skips_zero_evidence_columns(self):
        # observation 1 can never occur; error must come from column 0 alone
        model = build_constant_model(3, y_dist=(1.0, 0.0))
        assert error_probability(model, DecisionRule.MAP) == pytest.approx(2 / 3, abs=1e-12)


class TestMapOptimalityGrid:
    @pytest.mark.parametrize("n", [5, 10, 20])
    @pytest.mark.parametrize("theta", [0.3, 0.4, 0.5])
    def test_map_minimizes_error(self, n, theta):
        model = build_coin_model(n, theta)
        p_map = error_probability(model, DecisionRule.MAP)
        for rule in (DecisionRule.EAP, DecisionRule.MEAP, DecisionRule.SAP):
            assert p_map <= error_probability(model, rule) + 1e-12

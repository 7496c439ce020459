import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cftrace.errors import ConfigurationError, PostSelectionError
from cftrace.networks import (
    KINDS,
    NetworkSpec,
    build,
    nested_mzi3_channel_state,
    path_amplitudes,
    side_mirror_transmittance,
    simulate,
)
from cftrace.trace import post_select, trace_detect_prob

from conftest import reference_nested

SMALL = [
    NetworkSpec("SimpleChannel", N=5),
    NetworkSpec("IfmMzi", bit=0),
    NetworkSpec("IfmMzi", bit=1),
    NetworkSpec("HwpMzi", bit=1),
    NetworkSpec("ZenoChain", N=6, bit=0),
    NetworkSpec("ZenoChain", N=6, bit=1),
    NetworkSpec("NestedMzi3"),
    NetworkSpec("NestedMzi3", bit=1),
    NetworkSpec("Salih", M=3, N=4, bit=0),
    NetworkSpec("Salih", M=3, N=4, bit=1),
    NetworkSpec("Li", M=4, N=4, bit=0),
    NetworkSpec("Li", M=4, N=4, bit=1),
]


class TestSpec:
    @pytest.mark.parametrize("alias,kind", [("salih", "Salih"), ("li", "Li"), ("zeno", "ZenoChain"), ("nested3", "NestedMzi3")])
    def test_aliases(self, alias, kind):
        assert NetworkSpec(alias, M=4, N=4).kind == kind

    def test_li_needs_even_sizes(self):
        with pytest.raises(ConfigurationError, match="even"):
            NetworkSpec("Li", M=7, N=8)

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            NetworkSpec("Mirror")

    def test_element_on_missing_path(self):
        with pytest.raises(ConfigurationError, match="no channel path"):
            NetworkSpec("Salih", M=3, N=3, elements={(3, 1): "shutter"})

    def test_unknown_element(self):
        with pytest.raises(ConfigurationError):
            NetworkSpec("ZenoChain", N=3, elements={(1, 1): "mirror"})

    def test_bad_bit(self):
        with pytest.raises(ConfigurationError):
            NetworkSpec("Salih", M=3, N=3, bit=2)

    @pytest.mark.parametrize(
        "spec",
        [
            NetworkSpec("Salih", M=3, N=5, bit=1, elements={(2, 3): "free"}, side_mirror_T3=0.1),
            NetworkSpec("Li", M=4, N=6),
            NetworkSpec("SimpleChannel", N=3, elements={(1, 2): "hwp"}),
        ],
    )
    def test_config_roundtrip(self, spec):
        assert NetworkSpec.from_config(spec.to_config()) == spec

    @pytest.mark.parametrize("kind,M,N,n", [("Salih", 4, 5, 12), ("Li", 4, 6, 15), ("ZenoChain", 1, 7, 6), ("SimpleChannel", 1, 9, 9)])
    def test_path_count(self, kind, M, N, n):
        assert NetworkSpec(kind, M=M, N=N).n_paths == n

    def test_side_mirror_transmittance(self):
        assert side_mirror_transmittance(10) == pytest.approx(1 - np.cos(np.pi / 20) ** 20)


WORKING = [
    NetworkSpec("IfmMzi", bit=0),
    NetworkSpec("HwpMzi", bit=0),
    NetworkSpec("HwpMzi", bit=1),
    NetworkSpec("ZenoChain", N=50, bit=0),
    NetworkSpec("ZenoChain", N=50, bit=1),
    NetworkSpec("Salih", M=8, N=200, bit=0),
    NetworkSpec("Salih", M=8, N=200, bit=1),
    NetworkSpec("Li", M=8, N=8, bit=0),
    NetworkSpec("Li", M=8, N=8, bit=1),
]


class TestCorrectDetector:
    @pytest.mark.parametrize("spec", WORKING, ids=lambda s: f"{s.kind}-{s.M}-{s.N}-{s.bit}")
    def test_fires_without_probes(self, spec):
        probs, _ = simulate(spec, 0.0)
        assert probs[spec.correct_detector] > 0.6

    @pytest.mark.parametrize("M,N", [(2, 2), (8, 8), (16, 4)])
    def test_li_is_deterministic(self, M, N):
        assert simulate(NetworkSpec("Li", M=M, N=N, bit=0))[0]["D1"] == pytest.approx(1.0)
        assert simulate(NetworkSpec("Li", M=M, N=N, bit=1))[0]["D2"] == pytest.approx(1.0)

    def test_ifm_bomb(self):
        probs, _ = simulate(NetworkSpec("IfmMzi", bit=1))
        assert probs["D1"] == pytest.approx(0.25)
        assert probs["D2"] == pytest.approx(0.25)
        assert probs["shutter"] == pytest.approx(0.5)


class TestPropagation:
    @pytest.mark.parametrize("spec", SMALL)
    def test_weight_conserved(self, spec):
        _, state = simulate(spec, 0.05)
        assert state.total_weight == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("kind", ["Salih", "Li"])
    @pytest.mark.parametrize("bit", [0, 1])
    def test_matches_element_level_reference(self, kind, bit):
        M, N, eps = 4, 6, 0.02
        _, state = simulate(NetworkSpec(kind, M=M, N=N, bit=bit), eps)
        ref = reference_nested(M, N, bit, eps, kind)
        for key in state.keys:
            fast = state.branch(key)
            slow = ref.branch(key)
            for d, port in (("D1", "L"), ("D2", "R")):
                assert fast.amp(d) == pytest.approx(slow.amp(port), abs=1e-13)

    def test_salih_bit1_never_reaches_d1(self):
        probs, _ = simulate(NetworkSpec("Salih", M=8, N=80, bit=1), 0.01)
        assert probs["D1"] < 1e-28

    def test_element_override(self):
        spec = NetworkSpec("ZenoChain", N=4, bit=0, elements={(1, 2): "shutter"})
        probs, _ = simulate(spec)
        assert probs["shutter"] > 0


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(KINDS), st.integers(2, 6), st.integers(2, 6), st.integers(0, 1), st.floats(0, 0.2))
def test_total_weight_is_one(kind, M, N, bit, eps):
    if kind == "Li":
        M, N = 2 * M, 2 * N
    _, state = simulate(NetworkSpec(kind, M=M, N=N, bit=bit), eps)
    assert state.total_weight == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.data())
def test_weak_values_on_one_time_slice_sum_to_one(n, data):
    # every path probed at the same moment: the path projectors add to identity
    flips = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
    spec = NetworkSpec("SimpleChannel", N=n, elements={(1, i + 1): "hwp" for i, f in enumerate(flips) if f})
    try:
        table = path_amplitudes(spec, "D")
        wv = table.weak_values()
    except PostSelectionError:
        return
    assert sum(wv.values()) == pytest.approx(1.0, abs=1e-9)


class TestPathAmplitudes:
    def test_zeno_forward_and_backward(self):
        N = 10
        t = path_amplitudes(NetworkSpec("ZenoChain", N=N))
        for n in range(1, N):
            s = np.sin(n * np.pi / (2 * N))
            assert t.fwd[(1, n)] == pytest.approx(s)
            assert t.bwd[(1, n)] == pytest.approx(s)
        assert t.postselect_prob == pytest.approx(1.0)

    def test_tagged_amplitude_is_eps_fwd_bwd(self):
        spec, eps = NetworkSpec("Salih", M=5, N=12), 1e-3
        t = path_amplitudes(spec, "D1")
        _, state = simulate(spec, eps)
        for p in spec.paths:
            # fwd is the undisturbed amplitude; earlier probes shave off O(eps^2)
            assert state.branch({p}).amp("D1") == pytest.approx(eps * t.fwd[p] * t.bwd[p], rel=1e-4)

    def test_custom_final_state_single_detector(self):
        spec = NetworkSpec("Salih", M=4, N=10)
        a = path_amplitudes(spec, "D1").weak_values()
        b = path_amplitudes(spec, final_state={"D1": 1.0}).weak_values()
        for p in spec.paths:
            assert a[p] == pytest.approx(b[p])

    def test_custom_final_state_superposition(self):
        # free MZI: the arm leading out of R interferes to zero on (D1 + D2)/sqrt 2
        t = path_amplitudes(NetworkSpec("IfmMzi"), final_state={"D1": 2**-0.5, "D2": 2**-0.5})
        assert t.detector == "custom"
        assert t.bwd[(1, 1)] == pytest.approx(0.0, abs=1e-15)
        assert t.overlap == pytest.approx(2**-0.5)

    def test_grid_shape(self):
        t = path_amplitudes(NetworkSpec("Li", M=4, N=6))
        assert t.grid().shape == (3, 5)
        assert t.grid("wv").shape == (3, 5)

    def test_no_firing_detector(self):
        with pytest.raises(ConfigurationError):
            path_amplitudes(NetworkSpec("SimpleChannel", N=3, bit=1))


class TestNestedMzi3:
    def test_free_channel_state(self):
        eps = 0.3
        ch = nested_mzi3_channel_state("free", eps, "D1")
        np.testing.assert_allclose(np.abs(ch.amps[:, 0]), [np.sqrt(1 - eps**2), eps], atol=1e-12)

    @pytest.mark.parametrize("bit,expected", [(0, (1 / 9, 2 / 9, 2 / 3)), (1, (0.0, 1 / 2, 1 / 6))])
    def test_detector_probabilities(self, bit, expected):
        probs, _ = simulate(NetworkSpec("NestedMzi3", bit=bit))
        got = [probs[d] for d in ("D1", "D2", "D3")]
        np.testing.assert_allclose(got, expected, atol=1e-14)

    def test_blocked_leaves_no_trace(self):
        _, state = simulate(NetworkSpec("NestedMzi3", bit=1), 0.3)
        p, ch = post_select(state, "D2")
        assert trace_detect_prob(ch) == 0.0

    def test_bad_element(self):
        with pytest.raises(ConfigurationError):
            nested_mzi3_channel_state("hwp")

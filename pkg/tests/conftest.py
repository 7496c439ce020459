import numpy as np
import pytest

from cftrace.modes import (
    BeamSplitter,
    ModeState,
    apply_beam_splitter,
    apply_hwp_phase,
    apply_lossy_mirror,
    apply_shutter,
)
from cftrace.networks import side_mirror_transmittance
from cftrace.trace import BranchedState, tag_interaction

# lines printed by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def reference_nested(M, N, bit, eps, kind="Salih"):
    """Salih/Li propagation built from the mode-level element functions.

    Independent of the compiled op program: it walks ModeState objects through
    apply_* calls and tags with tag_interaction.
    """
    beta = np.pi / (2 * M)
    alpha = np.pi / (2 * N) if kind == "Salih" else np.pi / N
    T3 = side_mirror_transmittance(N) if kind == "Salih" else 0.0
    outer = BeamSplitter(beta, "L", "R")
    inner = BeamSplitter(alpha, "R", "C")
    bs = BranchedState.from_mode_state(ModeState.prepare(("L", "R", "C"), "L"))
    for k in range(1, M + 1):
        bs = bs.map_modes(lambda s: apply_beam_splitter(s, outer))
        if k == M:
            break
        if T3 > 0:
            bs = bs.map_modes(lambda s: apply_lossy_mirror(s, "L", T3))
        for n in range(1, N + 1):
            bs = bs.map_modes(lambda s: apply_beam_splitter(s, inner))
            if n == N:
                break
            if eps > 0:
                bs = tag_interaction(bs, "C", (k, n), eps)
            if bit == 1:
                if kind == "Salih":
                    bs = bs.map_modes(lambda s: apply_shutter(s, "C"))
                else:
                    bs = bs.map_modes(lambda s: apply_hwp_phase(s, "C"))
        bs = bs.map_modes(lambda s: apply_shutter(s, "C", sink="exit"))
    return bs


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)

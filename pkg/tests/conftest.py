import pytest

import trajdiag as td
from trajdiag.data import biquad_path

ONE_POLE_RC = "V1 1 0 1\nR1 1 2 1\nC1 2 0 1\n.input V1\n.output 2\n"

# First frequency pair of the 100x100 log grid over [0.01, 100] rad/s (row
# major scan) whose trajectories are intersection free for the bundled
# circuit; re-derived from scratch by the acceptance suite.
ORACLE_VECTOR = (0.01, 0.3125715849688237)


@pytest.fixture(scope="session")
def biquad():
    return td.parse_netlist(biquad_path().read_text())


@pytest.fixture(scope="session")
def biquad_faults(biquad):
    return td.FaultConfig(targets=biquad.passive_ids())

import numpy as np
import pytest

from subwave.capacitance import Material, MultipoleSettings, ResonatorArray
from subwave.presets import preset_lattice, preset_resonators, default_material

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def material():
    return default_material()


@pytest.fixture(scope="session")
def square(material):
    return preset_lattice("square"), preset_resonators("single", material)


@pytest.fixture(scope="session")
def dimer(material):
    return preset_lattice("square"), preset_resonators("dimer", material)


@pytest.fixture(scope="session")
def honeycomb_pair(material):
    return preset_lattice("honeycomb"), preset_resonators("honeycomb-pair", material)


@pytest.fixture(scope="session")
def trimer(material):
    return preset_lattice("honeycomb"), preset_resonators("trimer-honeycomb", material)


@pytest.fixture(scope="session")
def fast_settings():
    return MultipoleSettings(multipole_order=4, lattice_sum_radius=20)


def record_criterion(name: str, passed: bool, detail: str = ""):
    ACCEPTANCE_RESULTS.append((name, passed, detail))
    assert passed, f"acceptance criterion failed: {name} {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)

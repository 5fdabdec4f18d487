import hypothesis
import numpy as np
import pytest

from analysis.models import build_model
from modules.shooting import prior_lift_problem, solve_prior_lift
from modules.switching_geometry import continue_switching_curve

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)


@pytest.fixture(scope="session")
def fedbatch_model():
    return build_model("fedbatch")


@pytest.fixture(scope="session")
def mri_model():
    return build_model("mri")


@pytest.fixture(scope="session")
def fedbatch_problem(fedbatch_model):
    return prior_lift_problem(fedbatch_model)


@pytest.fixture(scope="session")
def mri_problem(mri_model):
    return prior_lift_problem(mri_model)


@pytest.fixture(scope="session")
def fedbatch_lift(fedbatch_problem):
    return solve_prior_lift(fedbatch_problem)


@pytest.fixture(scope="session")
def mri_lift(mri_problem):
    return solve_prior_lift(mri_problem)


@pytest.fixture(scope="session")
def fedbatch_curve(fedbatch_problem, fedbatch_lift):
    return continue_switching_curve(fedbatch_problem, fedbatch_lift, n_samples=21)


@pytest.fixture(scope="session")
def mri_curve(mri_problem, mri_lift):
    return continue_switching_curve(mri_problem, mri_lift, n_samples=21)

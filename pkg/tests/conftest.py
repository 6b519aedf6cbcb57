import sys
import os

import numpy as np
import pytest

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.catalog import build_model
from models.spec import (
    AffineWeight,
    DensityInitial,
    DiffusionSpec,
    GaussianShape,
    InteractionCoefficients,
    ModelSpec,
    NoiseSpec,
    UncertaintyLaw,
)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def opinion_a():
    return build_model("opinion-A")


@pytest.fixture
def opinion_b():
    return build_model("opinion-B")


@pytest.fixture
def wealth_a():
    return build_model("wealth-A")


@pytest.fixture
def wealth_b():
    return build_model("wealth-B")


@pytest.fixture
def bounded_confidence():
    return build_model("bounded-confidence")


def smooth_opinion_model(diffusion: str = "sqrt-parabola", weight: float = 1.0, sigma2: float = 0.2) -> ModelSpec:
    """Opinion-type model with a smooth Gaussian initial bump"""
    return ModelSpec(
        key="smooth-opinion",
        family="general",
        domain=(-1.0, 1.0),
        coefficients=InteractionCoefficients.symmetric(AffineWeight(weight)),
        diffusion=DiffusionSpec(diffusion),
        noise=NoiseSpec(sigma2),
        uncertainty=UncertaintyLaw((0.0,), (1.0,)),
        initial=DensityInitial(GaussianShape(0.2, 0.15), label="gaussian"),
    )

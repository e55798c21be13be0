import numpy as np
import pytest

from latentslice.models import BimodalMixture, CorrelatedGaussian, Funnel, IsotropicGaussian


class ScriptedRng:
    """Stand-in generator that replays fixed uniforms and integers.

    ``random(size)`` pops ``size`` values from the uniform script and
    ``integers(lo, hi, size)`` pops from the integer script.
    """

    def __init__(self, uniforms=(), ints=()):
        self.uniforms = list(uniforms)
        self.ints = list(ints)

    def _take(self, pool, size):
        if size is None:
            return pool.pop(0)
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        vals = [pool.pop(0) for _ in range(n)]
        return np.array(vals).reshape(shape)

    def random(self, size=None):
        return self._take(self.uniforms, size)

    def integers(self, lo, hi=None, size=None):
        return self._take(self.ints, size)


@pytest.fixture
def scripted():
    return ScriptedRng


# njit twins compile once per target instance, so share them across the session
@pytest.fixture(scope="session")
def targets():
    return {
        "bimodal": BimodalMixture().target(),
        "bivariate": CorrelatedGaussian().target(),
        "gauss50": IsotropicGaussian().target(),
        "funnel": Funnel().target(),
    }

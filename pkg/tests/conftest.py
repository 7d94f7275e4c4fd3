import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import HealthCheck, settings

from gibbs_sdp.linalg import SparseHermitian
from gibbs_sdp.model import SdpInstance, check_instance

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (a + a.conj().T) / 2
    return scale * h / np.max(np.abs(np.linalg.eigvalsh(h)))


def random_state(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def diag(values):
    return SparseHermitian(sp.diags(np.asarray(values, dtype=float), format="csr"))


def diagonal_instance(C, A, b, R=None, **kw):
    b = np.asarray(b, dtype=float)
    R = float(np.max(np.abs(b))) if R is None else R
    return check_instance(SdpInstance(n=len(C), m=len(A), s=1, C=diag(C),
                                      A=tuple(diag(a) for a in A), b=b, R=R, **kw))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

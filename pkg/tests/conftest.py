import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=50, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_basis(rng, n, k):
    return np.linalg.qr(rng.standard_normal((n, k)))[0]


def random_orthogonal(rng, k):
    return np.linalg.qr(rng.standard_normal((k, k)))[0]


def pairwise_intersection_dim(views, cos_tol=1e-8):
    """Oracle: intersect ranges one view at a time through principal vectors."""
    def basis(X):
        U, s, _ = np.linalg.svd(X, full_matrices=False)
        if s.size == 0 or s[0] == 0:
            return U[:, :0]
        return U[:, s > max(X.shape) * np.finfo(float).eps * s[0]]

    B = basis(views[0])
    for X in views[1:]:
        if B.shape[1] == 0:
            return 0
        other = basis(X)
        if other.shape[1] == 0:
            return 0
        A, cos, _ = np.linalg.svd(B.T @ other, full_matrices=False)
        B = B @ A[:, cos > 1 - cos_tol]
    return B.shape[1]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

import pytest

from phigamma import iwasawa as iw

GRID = [(2, 1, 2, 2, 5), (2, 2, 2, 1, 5), (3, 1, 2, 2, 4), (3, 2, 1, 2, 4), (5, 1, 1, 1, 6)]


@pytest.fixture(params=GRID, ids=lambda t: ",".join(map(str, t)))
def grid_point(request):
    return iw.validate_params(*request.param)


@pytest.fixture
def gp3():
    """p=3, n=1, m=2, N=2, l=4: the worked level."""
    return iw.validate_params(3, 1, 2, 2, 4)

import pytest


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='Also run the desk-scale acceptance runs (minutes).')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: desk-scale acceptance run, needs --runslow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def mub4():
    from mubqkd import fourier_mub_pair
    return fourier_mub_pair(4)


@pytest.fixture
def hadamard4():
    from mubqkd import hadamard_mub_4
    return hadamard_mub_4()

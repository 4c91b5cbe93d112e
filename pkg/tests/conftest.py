import pytest

from gibbs_partitions import bundled_scheme


@pytest.fixture(scope="session")
def bell():
    return bundled_scheme("bell")


@pytest.fixture(scope="session")
def dense_gauss():
    return bundled_scheme("dense-gauss")


@pytest.fixture(scope="session")
def dense_stable():
    return bundled_scheme("dense-stable")


@pytest.fixture(scope="session")
def convergent():
    return bundled_scheme("convergent")


@pytest.fixture(scope="session")
def mixture():
    return bundled_scheme("mixture")


@pytest.fixture(scope="session")
def dilute():
    return bundled_scheme("dilute")


@pytest.fixture(scope="session")
def single_component():
    return bundled_scheme("single-component")

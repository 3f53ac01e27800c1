import pytest

from relalg import gallery_diamond, gallery_pe_theory


@pytest.fixture(scope="session")
def diamond():
    return gallery_diamond()


@pytest.fixture(scope="session")
def pe_theory():
    return gallery_pe_theory()

import pytest

from djnmr import five_spin_system, three_spin_system, transition_table


@pytest.fixture(scope="session")
def s3():
    return three_spin_system()


@pytest.fixture(scope="session")
def s5():
    return five_spin_system()


@pytest.fixture(scope="session")
def tables3(s3):
    return [transition_table(s3, i) for i in range(s3.n)]


@pytest.fixture(scope="session")
def tables5(s5):
    return [transition_table(s5, i) for i in range(s5.n)]

import numpy as np
import pytest

from oovrecover.phoneset import PhoneSet, default_data_path, load_lexicon, load_phoneset


@pytest.fixture(scope="session")
def phoneset():
    return load_phoneset(default_data_path("phones.tsv"), default_data_path("features.tsv"))


@pytest.fixture(scope="session")
def lexicon(phoneset):
    return load_lexicon(default_data_path("lexicon.tsv"), phoneset)


@pytest.fixture
def toy_phoneset():
    """Four phones a, b, c, d with one-hot features."""
    return PhoneSet.from_table(list("abcd"), np.eye(4), ["f1", "f2", "f3", "f4"])



ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

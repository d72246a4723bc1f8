import warnings

import pytest

from handsteer import synth
from handsteer.recognizer import TrainConfig, train_recognizer


@pytest.fixture(scope="session")
def training_recordings():
    return synth.standard_training_set(seed=0)


@pytest.fixture(scope="session")
def model(training_recordings):
    """One trained recognizer shared by the whole suite (training is slow)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return train_recognizer(training_recordings, TrainConfig(seed=0))

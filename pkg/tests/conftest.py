import pytest

from rrlab.corpus import build_corpus
from rrlab.model import ModelConfig, init
from rrlab.tokenizer import train_vocab
from rrlab.training import TrainState


MAX_A_B = """fn main(a: int, b: int) -> int {
  if a < b {
    return b;
  }
  return a;
}
"""


@pytest.fixture(scope="session")
def small_corpus():
    """Shared 60/10/10 corpus; tests must not mutate it."""
    return build_corpus(seed=101, n_syntactic=60, n_semantic=10, n_test=10)


@pytest.fixture(scope="session")
def small_vocab(small_corpus):
    texts = []
    for s in small_corpus.syntactic:
        texts += [s.buggy_text, s.context_text, s.fix_text]
    return train_vocab(texts, 512)


@pytest.fixture(scope="session")
def tiny_model_config():
    return ModelConfig(
        vocab_size=20,
        d_model=8,
        n_heads=2,
        n_layers_enc=1,
        n_layers_dec=1,
        d_ff=16,
        max_input=16,
        max_target=10,
        seed=3,
    )


@pytest.fixture(scope="session")
def tiny_params(tiny_model_config):
    return init(tiny_model_config)


@pytest.fixture()
def tiny_state(tiny_params):
    return TrainState(params=tiny_params)

"""Session-scoped fixtures shared by module tests and the acceptance suite.

The expensive resources (the 2000-document default corpus and the trained
models on it) are built once per session and reused wherever needed.
"""

import pytest

from pageorder.corpus import CorpusConfig, generate_corpus, shuffle_instance, split_corpus
from pageorder.heuristics import order_greedy_nn, order_tsp_nn
from pageorder.metrics import mean_tau
from pageorder.models import Arch, build_model, desk_config
from pageorder.numcore import RngStream
from pageorder.training import TrainConfig, fit

ACCEPT_EVAL_SEED = 99
ACCEPT_MODEL_SEED = 1
ACCEPT_TRAIN_SEED = 7


@pytest.fixture(scope="session")
def default_corpus():
    """The default 2000-document synthetic corpus plus its 70/15/15 split."""
    cfg = CorpusConfig(seed=0)
    docs = generate_corpus(cfg)
    splits = split_corpus(docs, seed=0)
    return cfg, docs, splits


@pytest.fixture(scope="session")
def default_test_instances(default_corpus):
    _, _, splits = default_corpus
    return [shuffle_instance(d, ACCEPT_EVAL_SEED) for d in splits[2]]


@pytest.fixture(scope="session")
def default_heuristics(default_corpus, default_test_instances):
    """Greedy and TSP nearest-neighbor results on the full corpus and test split."""
    _, docs, _ = default_corpus
    all_instances = [shuffle_instance(d, ACCEPT_EVAL_SEED) for d in docs]

    def greedy_seed(inst):
        return RngStream(ACCEPT_EVAL_SEED).split("greedy-start").split(inst.doc_id)

    full = {
        "greedy_nn": mean_tau(all_instances, [order_greedy_nn(i.pages, greedy_seed(i)) for i in all_instances]),
        "tsp_nn": mean_tau(all_instances, [order_tsp_nn(i.pages) for i in all_instances]),
    }
    test = {
        "greedy_nn": mean_tau(
            default_test_instances,
            [order_greedy_nn(i.pages, greedy_seed(i)) for i in default_test_instances],
        ),
        "tsp_nn": mean_tau(default_test_instances, [order_tsp_nn(i.pages) for i in default_test_instances]),
    }
    return full, test


@pytest.fixture(scope="session")
def trained_pairwise_default(default_corpus):
    """Pairwise ranking model trained 30 epochs on the default corpus."""
    _, _, splits = default_corpus
    model = build_model(desk_config(Arch.PAIRWISE_RANK, input_dim=64, seed=ACCEPT_MODEL_SEED))
    result = fit(
        model,
        splits[0],
        splits[1],
        TrainConfig(epochs=30, batch_size=16, seed=ACCEPT_TRAIN_SEED),
    )
    return model, result

import json
from pathlib import Path

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizer

REPO_ROOT = Path(__file__).resolve().parents[2]
DATA_DIR = REPO_ROOT / "data"

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


def corpus_words(path: Path) -> list[str]:
    docs = json.loads(path.read_text(encoding="utf-8"))
    words = {token for doc in docs for token in doc["text"].split()}
    # Leave the noise words out of the vocabulary so they hit [UNK].
    return sorted(w for w in words if not w.startswith("junk"))


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> Path:
    """A BERT small enough to run in tests, built locally from scratch.

    Vocabulary covers the bundled sample corpus (minus its noise words);
    weights are randomly initialized under a fixed seed. The 24-position
    limit forces chunking on ordinary documents.
    """
    model_dir = tmp_path_factory.mktemp("tiny-bert")
    vocab = SPECIALS + corpus_words(DATA_DIR / "sample_corpus.json")
    vocab_file = model_dir / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")

    tokenizer = BertTokenizer(str(vocab_file), do_lower_case=True, model_max_length=24)
    tokenizer.save_pretrained(model_dir)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=16,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=24,
    )
    torch.manual_seed(0)
    BertModel(config).save_pretrained(model_dir)
    return model_dir


@pytest.fixture(scope="session")
def sample_corpus_path() -> Path:
    return DATA_DIR / "sample_corpus.json"


@pytest.fixture()
def small_corpus(tmp_path) -> Path:
    """Three short documents drawn from the sample corpus vocabulary."""
    docs = [
        {"id": "a1", "text": "g00w01 g00w02 common00 g00w03", "group": "g00"},
        {"id": "b2", "text": "g01w01 g01w02 common01 junk999", "group": "g01"},
        {"id": "c3", "text": "g02w01 common02 g02w03 g02w04", "group": "g02"},
    ]
    path = tmp_path / "small_corpus.json"
    path.write_text(json.dumps(docs, indent=2), encoding="utf-8")
    return path

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import styled_corpus, trained_model  # noqa: E402

from discourse_reward.motifs import document_motif_counts  # noqa: E402


@pytest.fixture(scope="session")
def corpus_bundle():
    """(human_docs, machine_docs, dset, human_counts, machine_counts, model)."""
    human_docs, machine_docs, dset = styled_corpus()
    human_counts = [document_motif_counts(d, dset.k) for d in human_docs]
    machine_counts = [document_motif_counts(d, dset.k) for d in machine_docs]
    model = trained_model(dset, human_counts, machine_counts)
    return human_docs, machine_docs, dset, human_counts, machine_counts, model

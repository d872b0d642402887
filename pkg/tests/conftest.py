import numpy as np
import pytest

from patrank.corpus import CitationEdge, Corpus, Document


def make_doc(doc_id, family_id=None, sections=None, labels=None, ipc3=()):
    return Document(
        doc_id=doc_id,
        family_id=family_id or doc_id,
        sections=sections or {"title": f"title {doc_id}", "abstract": f"abstract {doc_id}"},
        labels=labels or {},
        ipc3=tuple(ipc3),
    )


@pytest.fixture
def toy_corpus():
    """Three families: F1 = {US1, US2}, F2 = {EP3}, F3 = {CN4}.

    Edges: F1 -> F2 (valid), F1 -> F1 (self), F2 -> F9 (dangling).
    Hand-enumerated qrels for the valid edge: queries US1 and US2, each with
    the single relevant doc EP3.
    """
    docs = [
        make_doc("US1", "F1", labels={"coarse": ("Mobility",)}),
        make_doc("US2", "F1", labels={"coarse": ("Mobility",)}),
        make_doc("EP3", "F2", labels={"coarse": ("Mobility",)}),
        make_doc("CN4", "F3", labels={"coarse": ("Vision",)}),
    ]
    edges = {
        CitationEdge("F1", "F2"),
        CitationEdge("F1", "F1"),
        CitationEdge("F2", "F9"),
    }
    return Corpus(docs, edges=edges)


@pytest.fixture
def rng():
    return np.random.default_rng(42)

import json

import numpy as np
import pytest

from patrank.corpus import (
    CORPUS_VIEWS,
    IN,
    NAMED_VIEWS,
    OUT,
    PARTS,
    QUERY_SECTIONS,
    UNRESOLVED,
    CitationEdge,
    Corpus,
    ViewSpec,
    build_qrels,
    build_view,
    clean_text,
    domain_of,
    extract_claim1,
    family_disjoint_split,
    get_view,
    jurisdiction_group,
    load_corpus,
    load_qrels_tsv,
    load_split_tsv,
    qa_check,
    write_corpus_jsonl,
    write_qrels_tsv,
    write_split_tsv,
)
from patrank.errors import ConfigError, EmptyInputError, FormatError, IntegrityError, ParseError

from conftest import make_doc


# ---------------------------------------------------------------------------
# cleaning and claim extraction


def test_clean_text_strips_tags_and_whitespace():
    # by hand: "A<p>B</p>" -> tags to spaces -> "A B " -> collapse -> "A B"
    assert clean_text("A<p>B</p>") == "A B"
    assert clean_text("  a \t b\n\nc ") == "a b c"
    assert clean_text("<div><b>x</b></div>") == "x"


def test_clean_text_normal_form():
    from hypothesis import given
    from hypothesis import strategies as st

    @given(st.text(max_size=120))
    def check(text):
        cleaned = clean_text(text)
        assert cleaned == cleaned.strip()
        assert "  " not in cleaned
        assert "\n" not in cleaned and "\t" not in cleaned

    check()


def test_extract_claim1_stops_at_claim2_marker():
    claims = "1. A device comprising a wheel.\n2. The device of claim 1.\n3. More."
    assert extract_claim1(claims).strip() == "1. A device comprising a wheel."
    # no second claim: whole text
    assert extract_claim1("1. Only claim.") == "1. Only claim."
    # marker must sit at line start
    assert extract_claim1("1. Uses 2. as an inline number") == "1. Uses 2. as an inline number"


# ---------------------------------------------------------------------------
# ingestion


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


def test_load_corpus_identity(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [
        {"_id": "US1", "title": "a", "text": "b", "family_id": "F1"},
        {"_id": "US2", "title": "c", "text": "d", "family_id": "F1"},
        {"_id": "EP3", "title": "e", "text": "f", "family_id": "F2"},
    ])
    corpus = load_corpus(path)
    assert len(corpus) == 3
    assert corpus.docs["US1"].section("title") == "a"
    assert corpus.docs["US1"].section("abstract") == "b"  # BEIR text -> abstract
    assert corpus.families["F1"] == ("US1", "US2")


def test_load_corpus_duplicate_id(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [{"_id": "US1", "title": "a", "text": "b"}, {"_id": "US1", "title": "c", "text": "d"}])
    with pytest.raises(IntegrityError, match="US1"):
        load_corpus(path)


def test_load_corpus_malformed_line_reports_number(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text('{"_id": "US1", "title": "a", "text": "b"}\nnot json\n')
    with pytest.raises(ParseError, match="line 2"):
        load_corpus(path)


def test_load_corpus_cleans_markup(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [{"_id": "US1", "title": "A<p>B</p>", "text": "x"}])
    assert load_corpus(path).docs["US1"].section("title") == "A B"


def test_load_corpus_derives_claim1(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [{
        "_id": "US1",
        "sections": {"claims": "1. A lift mechanism.\n2. The lift of claim 1."},
    }])
    doc = load_corpus(path).docs["US1"]
    assert doc.section("claim1") == "1. A lift mechanism."
    assert doc.section("claims").startswith("1. A lift mechanism.")


def test_load_corpus_strict_rejects_unknown_family(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, [{"_id": "US1", "title": "a", "text": "b", "family_id": "F1"}])
    cits = tmp_path / "citations.tsv"
    cits.write_text("citing_family\tcited_family\nF1\tF9\n")
    load_corpus(path, citations_path=cits)  # non-strict: fine
    with pytest.raises(IntegrityError, match="F9"):
        load_corpus(path, citations_path=cits, strict=True)


# ---------------------------------------------------------------------------
# views


def doc_with(sections):
    return make_doc("US1", "F1", sections=sections)


def test_build_view_ta():
    corpus = Corpus([doc_with({"title": "X", "abstract": "Y"})])
    assert build_view(corpus, get_view("TA")).texts["US1"] == "X Y"


def test_build_view_skips_empty_sections():
    corpus = Corpus([doc_with({"title": "X", "abstract": "Y"})])  # no claims
    assert build_view(corpus, get_view("TAC")).texts["US1"] == "X Y"


def test_build_view_flags_all_empty():
    corpus = Corpus([doc_with({"title": "X"})])
    vc = build_view(corpus, get_view("DWPI-TA"))
    assert vc.texts["US1"] == ""
    assert vc.empty_ids == {"US1"}


def test_build_view_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        ViewSpec("bad", ("title", "nosuch"))


def test_named_views_golden_compositions():
    # golden compositions of the six named views
    expected = {
        "TA": ("title", "abstract"),
        "TAC": ("title", "abstract", "claims"),
        "Claim1": ("claim1",),
        "Abstract": ("abstract",),
        "DWPI-Full": (
            "dwpi_title", "dwpi_detail", "dwpi_novelty", "dwpi_use",
            "dwpi_advantage", "dwpi_focus", "claims", "abstract", "title", "topics",
        ),
        "DWPI-TA": (
            "dwpi_title", "dwpi_detail", "dwpi_novelty", "dwpi_use",
            "dwpi_advantage", "dwpi_focus",
        ),
    }
    for name, sections in expected.items():
        assert NAMED_VIEWS[name].section_list == sections, name
    assert len(QUERY_SECTIONS) == 5 and len(CORPUS_VIEWS) == 6


def test_build_view_is_order_preserving():
    corpus = Corpus([doc_with({"title": "X", "abstract": "Y", "claims": "Z"})])
    spec = ViewSpec("rev", ("claims", "abstract", "title"), separator="|")
    assert build_view(corpus, spec).texts["US1"] == "Z|Y|X"


# ---------------------------------------------------------------------------
# splits


def test_split_exact_divisibility():
    corpus = Corpus([make_doc(f"US{i}", f"F{i}") for i in range(10)])
    split = family_disjoint_split(corpus, (0.8, 0.1, 0.1), seed=42)
    counts = split.counts()
    assert (counts["train"], counts["validation"], counts["test"]) == (8, 1, 1)


def test_split_keeps_families_whole():
    docs = [make_doc(f"US{i}", "FBIG") for i in range(5)]
    docs += [make_doc(f"EP{i}", f"F{i}") for i in range(5)]
    split = family_disjoint_split(Corpus(docs), seed=0)
    parts = {split.assignment[f"US{i}"] for i in range(5)}
    assert len(parts) == 1


def test_split_deterministic():
    corpus = Corpus([make_doc(f"US{i}", f"F{i // 2}") for i in range(30)])
    a = family_disjoint_split(corpus, seed=7)
    b = family_disjoint_split(corpus, seed=7)
    assert a.assignment == b.assignment
    c = family_disjoint_split(corpus, seed=8)
    assert any(a.assignment[d] != c.assignment[d] for d in a.assignment)


def test_split_rejects_bad_input():
    with pytest.raises(EmptyInputError):
        family_disjoint_split(Corpus([]))
    corpus = Corpus([make_doc("US1")])
    with pytest.raises(ConfigError):
        family_disjoint_split(corpus, ratios=(0.5, 0.5, 0.5))


def test_split_never_spans_families_property():
    rng = np.random.default_rng(3)
    for trial in range(5):
        docs = []
        for f in range(40):
            for j in range(int(rng.integers(1, 5))):
                docs.append(make_doc(f"US{f}_{j}", f"F{f}"))
        corpus = Corpus(docs)
        split = family_disjoint_split(corpus, seed=trial)
        for fid, members in corpus.families.items():
            assert len({split.assignment[d] for d in members}) == 1, fid


# ---------------------------------------------------------------------------
# qrels


def test_build_qrels_hand_enumerated(toy_corpus):
    qrels = build_qrels(toy_corpus, toy_corpus.edges)
    # valid edge F1->F2 expands to queries US1, US2 each judging EP3;
    # the self edge and the dangling edge contribute nothing
    assert qrels.query_ids == ["US1", "US2"]
    assert qrels.relevant("US1") == {"EP3"}
    assert qrels.relevant("US2") == {"EP3"}
    assert qrels.n_judgments == 2
    # Mobility cites Mobility -> IN
    assert qrels.judgments["US1"]["EP3"] == IN


def test_build_qrels_never_pairs_same_family(toy_corpus):
    qrels = build_qrels(toy_corpus, toy_corpus.edges)
    for qid in qrels.query_ids:
        qfam = toy_corpus.docs[qid].family_id
        for did in qrels.relevant(qid):
            assert toy_corpus.docs[did].family_id != qfam


def test_build_qrels_domain_tags():
    docs = [
        make_doc("US1", "F1", labels={"coarse": ("Mobility",)}),
        make_doc("EP2", "F2", labels={"coarse": ("Vision",)}),
        make_doc("CN3", "F3"),  # no labels, no ipc3 -> unresolved
    ]
    corpus = Corpus(docs)
    qrels = build_qrels(corpus, {CitationEdge("F1", "F2"), CitationEdge("F1", "F3")})
    assert qrels.judgments["US1"]["EP2"] == OUT
    assert qrels.judgments["US1"]["CN3"] == UNRESOLVED


def test_qrels_tags_partition_judgments(toy_corpus):
    qrels = build_qrels(toy_corpus, toy_corpus.edges)
    for qid in qrels.query_ids:
        tags = [qrels.judgments[qid][d] for d in qrels.relevant(qid)]
        assert all(t in (IN, OUT, UNRESOLVED) for t in tags)
        n = len(qrels.tagged(qid, IN)) + len(qrels.tagged(qid, OUT)) + len(qrels.tagged(qid, UNRESOLVED))
        assert n == len(qrels.relevant(qid))


# ---------------------------------------------------------------------------
# domains, jurisdictions


def test_domain_of_majority():
    doc = make_doc("US1", labels={"a": ("Mobility", "Vision"), "b": ("Mobility",)})
    assert domain_of(doc) == "Mobility"


def test_domain_of_tie_lexicographic():
    doc = make_doc("US1", labels={"a": ("Vision",), "b": ("Mobility",)})
    assert domain_of(doc) == "Mobility"


def test_domain_of_ipc_fallback():
    doc = make_doc("US1", labels={}, ipc3=("A61", "G06"))
    assert domain_of(doc) == "A61"


def test_domain_of_unresolved():
    assert domain_of(make_doc("US1", labels={}, ipc3=())) is None


@pytest.mark.parametrize(
    "doc_id,group",
    [
        ("US1234567", "EN"), ("EP1", "EN"), ("WO1", "EN"), ("GB1", "EN"), ("AU1", "EN"), ("CA1", "EN"),
        ("TW555", "CN"), ("CN1", "CN"), ("HK1", "CN"),
        ("JP1", "JP"), ("DE1", "DE"), ("AT1", "DE"), ("CH1", "DE"),
        ("FR1", "FR"), ("ES1", "ES"), ("RU1", "RU"), ("BR999", "OTHER"),
    ],
)
def test_jurisdiction_group(doc_id, group):
    assert jurisdiction_group(doc_id) == group


def test_jurisdiction_group_short_id_errors():
    with pytest.raises(FormatError):
        jurisdiction_group("U")


def test_jurisdiction_group_override():
    assert jurisdiction_group("AT1", overrides={"AT": "OTHER"}) == "OTHER"


# ---------------------------------------------------------------------------
# QA


def test_qa_clean_fixture_passes(toy_corpus):
    split = family_disjoint_split(toy_corpus, seed=1)
    qrels = build_qrels(toy_corpus, toy_corpus.edges)
    assert qa_check(toy_corpus, split, qrels).ok


def test_qa_flags_missing_doc(toy_corpus):
    split = family_disjoint_split(toy_corpus, seed=1)
    from patrank.corpus import Qrels

    qrels = Qrels({"US1": {"ZZ9": IN}})
    report = qa_check(toy_corpus, split, qrels)
    assert [v.kind for v in report.violations] == ["qrels-doc-missing"]


def test_qa_flags_split_family(toy_corpus):
    qrels = build_qrels(toy_corpus, toy_corpus.edges)
    bad = dict.fromkeys(toy_corpus.docs, "train")
    bad["US2"] = "test"  # US1 and US2 share family F1
    from patrank.corpus import Split

    report = qa_check(toy_corpus, Split(bad, (0.8, 0.1, 0.1), 0), qrels)
    assert [v.kind for v in report.violations] == ["split-family"]
    assert report.violations[0].subject == "F1"


# ---------------------------------------------------------------------------
# round trips


def test_corpus_jsonl_round_trip(tmp_path, toy_corpus):
    path = tmp_path / "corpus.jsonl"
    write_corpus_jsonl(toy_corpus, path)
    reloaded = load_corpus(path)
    assert reloaded.doc_ids == toy_corpus.doc_ids
    for doc_id in toy_corpus.docs:
        assert reloaded.docs[doc_id].sections == toy_corpus.docs[doc_id].sections
        assert reloaded.docs[doc_id].labels == toy_corpus.docs[doc_id].labels


def test_qrels_tsv_round_trip(tmp_path, toy_corpus):
    qrels = build_qrels(toy_corpus, toy_corpus.edges)
    path = tmp_path / "qrels.tsv"
    write_qrels_tsv(qrels, path)
    assert path.read_text().splitlines()[0] == "query-id\tcorpus-id\tscore"
    reloaded = load_qrels_tsv(path)
    assert reloaded.query_ids == qrels.query_ids
    for qid in qrels.query_ids:
        assert reloaded.relevant(qid) == qrels.relevant(qid)
    retagged = reloaded.retagged(toy_corpus, domain_of)
    assert retagged.judgments == qrels.judgments


def test_split_tsv_round_trip(tmp_path, toy_corpus):
    split = family_disjoint_split(toy_corpus, seed=5)
    path = tmp_path / "split.tsv"
    write_split_tsv(split, path)
    reloaded = load_split_tsv(path)
    assert reloaded.assignment == dict(split.assignment)
    assert set(reloaded.assignment.values()) <= set(PARTS)

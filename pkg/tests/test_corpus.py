import json
import re
from datetime import date

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import scan_tokens
from snapsearch.corpus import Document, iter_corpus, load_corpus, tokenize, write_corpus
from snapsearch.errors import IntegrityError, ParseError
from snapsearch.synth import TextModel, random_documents


def _write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def test_empty_file(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text("")
    assert load_corpus(p) == []


def test_one_record(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [json.dumps({"doc_id": 1, "uri": "u", "modified_date": "2005-06-01", "text": "a b"})])
    assert load_corpus(p) == [Document(1, "u", date(2005, 6, 1), "a b")]


def test_round_trip_generated(tmp_path):
    rng = np.random.default_rng(0)
    docs = random_documents(1000, rng, TextModel.create(500, rng))
    p = tmp_path / "c.jsonl"
    write_corpus(p, docs)
    first = load_corpus(p)
    assert first == docs
    q = tmp_path / "d.jsonl"
    write_corpus(q, first)
    assert load_corpus(q) == docs
    assert p.read_bytes() == q.read_bytes()


def test_unicode_text_round_trip(tmp_path):
    docs = [Document(0, "u", date(2000, 1, 1), "Grüße 東京 ñ"), Document(5, "v", date(2100, 12, 31), "")]
    p = tmp_path / "c.jsonl"
    write_corpus(p, docs)
    assert load_corpus(p) == docs


@pytest.mark.parametrize(
    "line, error",
    [
        ("not json", ParseError),
        ('{"doc_id": 1, "uri": "u", "modified_date": "2005-06-01"}', ParseError),
        ('{"doc_id": -1, "uri": "u", "modified_date": "2005-06-01", "text": ""}', ParseError),
        ('{"doc_id": 1, "uri": "u", "modified_date": "2005/06/01", "text": ""}', ParseError),
        ('{"doc_id": 1, "uri": "u", "modified_date": "1989-12-31", "text": ""}', IntegrityError),
        ('{"doc_id": 1, "uri": "u", "modified_date": "2101-01-01", "text": ""}', IntegrityError),
        ('{"doc_id": 1, "uri": "u", "modified_date": "2005-06-01", "text": "", "x": 1}', ParseError),
    ],
)
def test_bad_records_name_the_line(tmp_path, line, error):
    p = tmp_path / "c.jsonl"
    good = json.dumps({"doc_id": 0, "uri": "u", "modified_date": "2005-06-01", "text": "a"})
    _write_lines(p, [good, line])
    with pytest.raises(error) as info:
        load_corpus(p)
    assert info.value.line == 2
    assert ":2:" in str(info.value)


def test_duplicate_doc_id(tmp_path):
    p = tmp_path / "c.jsonl"
    rec = json.dumps({"doc_id": 3, "uri": "u", "modified_date": "2005-06-01", "text": "a"})
    _write_lines(p, [rec, rec])
    with pytest.raises(IntegrityError) as info:
        load_corpus(p)
    assert info.value.line == 2


def test_invalid_utf8(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_bytes(b'{"doc_id": 1, "uri": "u", "modified_date": "2005-06-01", "text": "\xff"}\n')
    with pytest.raises(ParseError):
        load_corpus(p)


def test_iter_corpus_streams(tmp_path):
    p = tmp_path / "c.jsonl"
    rng = np.random.default_rng(1)
    docs = random_documents(10, rng, TextModel.create(50, rng))
    write_corpus(p, docs)
    it = iter_corpus(p)
    assert next(it) == docs[0]


@pytest.mark.parametrize(
    "text, tokens",
    [
        ("Hello, World", ["hello", "world"]),
        ("", []),
        ("IPv4 2021-03", ["ipv4", "2021", "03"]),
        ("snake_case--and  spaces", ["snake", "case", "and", "spaces"]),
        ("ÉCOLE naïve", ["école", "naïve"]),
    ],
)
def test_tokenize_examples(text, tokens):
    assert tokenize(text) == tokens


@given(st.text())
def test_tokenize_matches_character_scan(text):
    assert tokenize(text) == scan_tokens(text)


@given(st.text())
def test_tokenize_idempotent_on_joined_output(text):
    tokens = tokenize(text)
    assert tokenize(" ".join(tokens)) == tokens


@given(st.text())
def test_tokens_are_lowercase_alphanumeric_runs(text):
    for tok in tokenize(text):
        assert tok and all(ch.isalnum() for ch in tok)
        assert tok == tok.lower()
        assert not re.search(r"\s", tok)


@given(
    st.lists(
        st.builds(
            Document,
            st.integers(0, 2**40),
            st.text(max_size=20),
            st.dates(date(1990, 1, 1), date(2100, 12, 31)),
            st.text(max_size=80),
        ),
        max_size=20,
        unique_by=lambda d: d.doc_id,
    )
)
def test_write_then_load_is_identity(tmp_path_factory, docs):
    p = tmp_path_factory.mktemp("c") / "c.jsonl"
    write_corpus(p, docs)
    assert load_corpus(p) == docs

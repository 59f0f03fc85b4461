"""Lexicon and antonym-table parsing."""

import pytest
from hypothesis import given, strategies as st

from cmsg.errors import LexiconParseError
from cmsg.lexicon import (
    AntonymRow,
    Lexicon,
    LexiconEntry,
    bundled_antonyms_path,
    bundled_lexicon_path,
    load_sentiment_lexicon,
    parse_antonym_rows,
    parse_sentiment_rows,
)


def count_data_lines(path):
    """Independent oracle: non-comment, non-blank line count."""
    n = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip() and not line.lstrip().startswith("#"):
                n += 1
    return n


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestSentimentParsing:
    def test_documented_row_shape(self, tmp_path):
        path = write(tmp_path, "lex.tsv", "a\t00001740\t0.125\t0\table#1\t(gloss)\n")
        entries = parse_sentiment_rows(path)
        assert entries == [LexiconEntry("a", 1740, 0.125, 0.0, ("able",))]

    def test_comment_only_file_is_empty(self, tmp_path):
        path = write(tmp_path, "lex.tsv", "# header\n\n# more\n")
        assert parse_sentiment_rows(path) == []

    def test_bundled_fixture_count_matches_line_oracle(self):
        path = bundled_lexicon_path()
        entries = parse_sentiment_rows(path)
        assert len(entries) == count_data_lines(path)

    def test_multi_lemma_terms_split_and_rank_stripped(self, tmp_path):
        path = write(tmp_path, "lex.tsv",
                     "a\t1\t0\t0.75\tawful#1 dreadful#2\tgloss\n")
        (entry,) = parse_sentiment_rows(path)
        assert entry.lemmas == ("awful", "dreadful")

    @pytest.mark.parametrize("row,line_no", [
        ("a\t1\t0.5\t0.25\tok#1\tgloss\nbroken row\n", 2),
        ("a\t1\tnot-a-number\t0\tword#1\tgloss\n", 1),
        ("a\t1\t0.5\t1.5\tword#1\tgloss\n", 1),
        ("a\t1\t0.75\t0.5\tword#1\tgloss\n", 1),     # pos+neg > 1
        ("x\t1\t0\t0\tword#1\tgloss\n", 1),          # bad pos tag
        ("a\tzz\t0\t0\tword#1\tgloss\n", 1),         # bad synset id
        ("a\t1\t0\t0\t\tgloss\n", 1),                # no lemmas
    ])
    def test_malformed_rows_carry_line_numbers(self, tmp_path, row, line_no):
        path = write(tmp_path, "lex.tsv", row)
        with pytest.raises(LexiconParseError) as err:
            parse_sentiment_rows(path)
        assert err.value.line_no == line_no

    def test_line_numbers_count_comments_and_blanks(self, tmp_path):
        path = write(tmp_path, "lex.tsv",
                     "# comment\n\na\t1\t0\t0\tgood#1\tgloss\nbad row\n")
        with pytest.raises(LexiconParseError) as err:
            parse_sentiment_rows(path)
        assert err.value.line_no == 4

    def test_unreadable_file_is_io_error(self, tmp_path):
        with pytest.raises(OSError):
            parse_sentiment_rows(str(tmp_path / "absent.tsv"))

    def test_load_is_deterministic(self, tmp_path):
        first = parse_sentiment_rows(bundled_lexicon_path())
        second = parse_sentiment_rows(bundled_lexicon_path())
        assert first == second

    def test_all_scores_in_range(self):
        for entry in parse_sentiment_rows(bundled_lexicon_path()):
            assert 0.0 <= entry.pos_score <= 1.0
            assert 0.0 <= entry.neg_score <= 1.0
            assert entry.pos_score + entry.neg_score <= 1.0 + 1e-9
            assert entry.lemmas
            assert all(lemma == lemma.lower() and lemma for lemma in entry.lemmas)


class TestNegativity:
    def test_fixture_value_read_back(self, lexicon):
        assert lexicon.negativity("bad", "a") == 0.625

    def test_absent_word_is_zero(self, lexicon):
        assert lexicon.negativity("zzzz") == 0.0

    def test_max_over_senses(self):
        lex = Lexicon([
            LexiconEntry("a", 1, 0.0, 0.25, ("rough",)),
            LexiconEntry("a", 2, 0.0, 0.5, ("rough",)),
        ])
        assert lex.negativity("rough") == 0.5
        assert lex.negativity("rough", "a") == 0.5

    def test_bundled_dual_sense_word(self, lexicon):
        # "rough" ships with two senses, 0.25 and 0.5
        assert lexicon.negativity("rough", "a") == 0.5

    def test_pos_filter(self):
        lex = Lexicon([LexiconEntry("a", 1, 0.0, 0.5, ("square",))])
        assert lex.negativity("square", "n") == 0.0
        assert lex.negativity("square", "a") == 0.5

    @given(st.lists(st.tuples(st.sampled_from("nvar"),
                              st.floats(min_value=0, max_value=1)),
                    max_size=20))
    def test_monotone_under_union(self, extra_rows):
        base = [LexiconEntry("a", 1, 0.0, 0.375, ("word",))]
        added = [LexiconEntry(pos, 100 + i, 0.0, round(neg, 3), ("word",))
                 for i, (pos, neg) in enumerate(extra_rows)]
        before = Lexicon(base).negativity("word")
        after = Lexicon(base + added).negativity("word")
        assert after >= before


class TestAntonyms:
    def test_single_row_lookup(self, lexicon):
        assert lexicon.antonyms_for("bad", "a") == ["good"]

    def test_pos_mismatch_is_empty(self, lexicon):
        assert lexicon.antonyms_for("good", "n") == []

    def test_order_preserving_dedup(self, tmp_path):
        path = write(tmp_path, "ant.tsv",
                     "happy\ta\tsad\nhappy\ta\tunhappy\nhappy\ta\tsad\n")
        rows = parse_antonym_rows(path)
        lex = Lexicon([], rows)
        assert lex.antonyms_for("happy", "a") == ["sad", "unhappy"]

    def test_multiword_antonym_rejected_with_line_number(self, tmp_path):
        path = write(tmp_path, "ant.tsv", "good\ta\tbad\nbig\ta\tnot large\n")
        with pytest.raises(LexiconParseError) as err:
            parse_antonym_rows(path)
        assert err.value.line_no == 2

    def test_wrong_column_count(self, tmp_path):
        path = write(tmp_path, "ant.tsv", "good\ta\n")
        with pytest.raises(LexiconParseError) as err:
            parse_antonym_rows(path)
        assert err.value.line_no == 1

    def test_bundled_rows_are_single_tokens(self, lexicon):
        for row in lexicon.antonym_rows:
            assert isinstance(row, AntonymRow)
            assert len(row.antonym.split()) == 1

    def test_bundled_antonyms_count_matches_line_oracle(self):
        rows = parse_antonym_rows(bundled_antonyms_path())
        assert len(rows) == count_data_lines(bundled_antonyms_path())

    def test_absent_lookups_never_fail(self, lexicon):
        assert lexicon.antonyms_for("zzzz", "a") == []
        assert lexicon.antonyms_for("", "n") == []


def test_load_combined(tmp_path):
    lex_path = write(tmp_path, "lex.tsv", "a\t1\t0\t0.625\tbad#1\tgloss\n")
    ant_path = write(tmp_path, "ant.tsv", "bad\ta\tgood\n")
    lex = load_sentiment_lexicon(lex_path, ant_path)
    assert lex.negativity("bad", "a") == 0.625
    assert lex.antonyms_for("bad", "a") == ["good"]

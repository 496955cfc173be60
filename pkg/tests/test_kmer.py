import pytest
from hypothesis import given, strategies as st

from bidbg.errors import InvalidKError, InvalidSymbolError
from bidbg.kmer import (
    Kmer,
    Strand,
    canonicalize,
    decode,
    decode_word,
    encode,
    encode_word,
    molecule_of,
    reverse_complement,
    reverse_complement_str,
    revcomp_word,
    spectrum,
    validate_k,
)

dna = st.text(alphabet="ACGT", min_size=1, max_size=32)
dna_pairs_same_len = st.integers(min_value=1, max_value=32).flatmap(
    lambda n: st.tuples(
        st.text(alphabet="ACGT", min_size=n, max_size=n),
        st.text(alphabet="ACGT", min_size=n, max_size=n),
    )
)


def test_packing_codes():
    # A=00, C=01, G=10, T=11, first symbol in the top bits
    assert encode_word("A") == 0
    assert encode_word("C") == 1
    assert encode_word("G") == 2
    assert encode_word("T") == 3
    assert encode_word("ACGT") == 0b00011011
    assert decode_word(0b00011011, 4) == "ACGT"


@given(dna_pairs_same_len)
def test_packed_order_matches_string_order(pair):
    a, b = pair
    assert (encode_word(a) < encode_word(b)) == (a < b)
    assert (encode_word(a) == encode_word(b)) == (a == b)


@given(dna)
def test_encode_decode_roundtrip(s):
    assert decode(encode(s)) == s


def test_reverse_complement_known_pair():
    assert decode(reverse_complement(encode("AAGTA"))) == "TACTT"


def test_reverse_complement_derived_example():
    s = "ATGCA"
    expect = reverse_complement_str(s)
    assert expect == "TGCAT"
    assert decode(reverse_complement(encode(s))) == expect


@given(dna)
def test_revcomp_word_matches_string_oracle(s):
    got = revcomp_word(encode_word(s), len(s))
    assert decode_word(got, len(s)) == reverse_complement_str(s)


@given(dna)
def test_revcomp_involution(s):
    x = encode(s)
    assert reverse_complement(reverse_complement(x)) == x


@given(st.integers(min_value=1, max_value=15).flatmap(
    lambda h: st.text(alphabet="ACGT", min_size=2 * h + 1, max_size=2 * h + 1)
))
def test_no_palindromes_at_odd_length(s):
    x = encode(s)
    assert reverse_complement(x) != x


def test_canonicalize_examples():
    got = canonicalize(encode("TGG"))
    assert decode(got.kmer) == "CCA"
    assert got.strand == Strand.NEG

    got = canonicalize(encode("ATG"))
    assert decode(got.kmer) == "ATG"
    assert got.strand == Strand.POS


@given(st.integers(min_value=1, max_value=15).flatmap(
    lambda h: st.text(alphabet="ACGT", min_size=2 * h + 1, max_size=2 * h + 1)
))
def test_canonical_stable_under_revcomp(s):
    x = encode(s)
    a = canonicalize(x)
    b = canonicalize(reverse_complement(x))
    assert a.kmer == b.kmer
    assert a.strand != b.strand
    assert a.kmer.word == min(x.word, reverse_complement(x).word)


def test_molecule_members():
    m = molecule_of(encode("TGG"))
    assert decode(m.canonical) == "CCA"
    assert decode(m.complement) == "TGG"
    assert m == molecule_of(encode("CCA"))


def test_spectrum_example():
    assert [decode(x) for x in spectrum("AATGC", 3)] == ["AAT", "ATG", "TGC"]


def test_spectrum_short_sequence_is_empty():
    assert spectrum("AT", 3) == []


def test_spectrum_rejects_bad_symbol():
    with pytest.raises(InvalidSymbolError) as exc:
        spectrum("AANGC", 3)
    assert exc.value.char == "N"
    assert exc.value.offset == 2


@pytest.mark.parametrize("k", [4, 2, 1, 0, -3, 33, 32])
def test_validate_k_rejects(k):
    with pytest.raises(InvalidKError):
        validate_k(k)


def test_validate_k_even_message_names_odd_rule():
    with pytest.raises(InvalidKError, match="odd"):
        validate_k(4)


def test_validate_k_accepts_full_odd_range():
    for k in range(3, 32, 2):
        validate_k(k)


def test_encode_rejects_overlong():
    with pytest.raises(InvalidKError):
        encode("A" * 33)


def test_kmer_rejects_word_overflow():
    with pytest.raises(ValueError):
        Kmer(3, 1 << 6)

"""Tests for the lexer, parser, desugarer, and unparser."""

import pytest

from tegi.errors import DesugarError, LexError, ParseError
from tegi.lang import (
    Apply,
    BangApply,
    Braces,
    Define,
    If,
    IndexedRef,
    IntLit,
    Lambda,
    Let,
    MarkAst,
    SymbolRef,
    TensorLit,
    WithSymbols,
    desugar_define_indices,
    parse_program,
    tokenize,
    unparse,
)


def kinds(text):
    return [t.type for t in tokenize(text) if t.type != "eof"]


def parse1(text):
    forms = parse_program(text)
    assert len(forms) == 1
    return forms[0]


class TestTokenize:
    def test_tensor_literal_with_subscript(self):
        # [PAPER] "[|1 2|]_i"
        assert kinds("[|1 2|]_i") == ["[|", "int", "int", "|]", "_", "sym"]

    def test_partial_derivative_call(self):
        # [PAPER] "(∂/∂ Γ~i_j_k x~l)"
        toks = tokenize("(∂/∂ Γ~i_j_k x~l)")
        assert kinds("(∂/∂ Γ~i_j_k x~l)") == [
            "(", "sym", "sym", "~", "sym", "_", "sym", "_", "sym",
            "sym", "~", "sym", ")",
        ]
        assert toks[1].value == "∂/∂"

    def test_dummy_symbols(self):
        # [PAPER] "g_#_#"
        assert kinds("g_#_#") == ["sym", "_", "#", "_", "#"]

    def test_supersubscript(self):
        assert kinds("[|11 22 33|]~_i") == ["[|", "int", "int", "int", "|]", "~_", "sym"]

    def test_inverted_scalar_sigil(self):
        assert kinds("[$f *$x]") == ["[", "$", "sym", "*$", "sym", "]"]

    def test_star_alone_is_a_symbol(self):
        toks = tokenize("(* -1 r)")
        assert kinds("(* -1 r)") == ["(", "sym", "int", "sym", ")"]
        assert toks[1].value == "*" and toks[2].value == -1

    def test_caret(self):
        assert kinds("r^2") == ["sym", "^", "int"]

    def test_comments(self):
        assert kinds("1 ; a comment\n2") == ["int", "int"]

    def test_strings(self):
        toks = tokenize('"hello world"')
        assert toks[0].type == "str" and toks[0].value == "hello world"

    def test_glued_flag(self):
        spaced = tokenize("a _i")
        glued = tokenize("a_i")
        assert spaced[1].glued is False
        assert glued[1].glued is True

    def test_unterminated_tensor(self):
        with pytest.raises(LexError) as ei:
            tokenize("[|1 2")
        assert "line 1" in str(ei.value)

    def test_unterminated_string(self):
        with pytest.raises(LexError):
            tokenize('"oops')

    def test_locations(self):
        toks = tokenize("(f\n  x)")
        assert (toks[2].line, toks[2].col) == (2, 3)


class TestParse:
    def test_min_lambda(self):
        # [PAPER] min function body
        got = parse1("(lambda [$x $y] (if (less-than? x y) x y))")
        assert got == Lambda(
            (("$", "x"), ("$", "y")),
            If(
                Apply(SymbolRef("less-than?"), (SymbolRef("x"), SymbolRef("y"))),
                SymbolRef("x"),
                SymbolRef("y"),
            ),
        )

    def test_bang_application(self):
        # [PAPER] !(. A B)
        got = parse1("!(. A B)")
        assert got == BangApply(SymbolRef("."), (SymbolRef("A"), SymbolRef("B")))

    def test_indexed_tensor_literal(self):
        # [PAPER] [|[|1 2|] [|3 4|]|]_j_i
        got = parse1("[|[|1 2|] [|3 4|]|]_j_i")
        assert got == IndexedRef(
            TensorLit((
                TensorLit((IntLit(1), IntLit(2))),
                TensorLit((IntLit(3), IntLit(4))),
            )),
            (MarkAst(-1, "j"), MarkAst(-1, "i")),
        )

    def test_mark_variances(self):
        assert parse1("v~i") == IndexedRef(SymbolRef("v"), (MarkAst(1, "i"),))
        assert parse1("v~_i") == IndexedRef(SymbolRef("v"), (MarkAst(0, "i"),))
        assert parse1("M_2_1") == IndexedRef(
            SymbolRef("M"), (MarkAst(-1, 2), MarkAst(-1, 1))
        )
        assert parse1("g_#_#") == IndexedRef(
            SymbolRef("g"), (MarkAst(-1, "#"), MarkAst(-1, "#"))
        )

    def test_with_symbols(self):
        got = parse1("(with-symbols {i j} (f i j))")
        assert got == WithSymbols(
            ("i", "j"), Apply(SymbolRef("f"), (SymbolRef("i"), SymbolRef("j")))
        )

    def test_let(self):
        got = parse1("(let {[$k (df-order A)]} k)")
        assert got == Let(
            (("k", Apply(SymbolRef("df-order"), (SymbolRef("A"),))),),
            SymbolRef("k"),
        )

    def test_caret_desugars_to_application(self):
        assert parse1("r^2") == Apply(SymbolRef("^"), (SymbolRef("r"), IntLit(2)))
        got = parse1("(sin θ)^2")
        assert got == Apply(
            SymbolRef("^"),
            (Apply(SymbolRef("sin"), (SymbolRef("θ"),)), IntLit(2)),
        )

    def test_plain_define(self):
        got = parse1("(define $x [|θ φ|])")
        assert got == Define("x", (), TensorLit((SymbolRef("θ"), SymbolRef("φ"))))

    def test_signature_define(self):
        got = parse1("(define $g__ M)")
        assert got == Define("g", (MarkAst(-1, None), MarkAst(-1, None)), SymbolRef("M"))

    def test_braces_argument(self):
        got = parse1("(transpose {i j} M)")
        assert got == Apply(
            SymbolRef("transpose"),
            (Braces((SymbolRef("i"), SymbolRef("j"))), SymbolRef("M")),
        )

    def test_marks_on_parenthesized_form(self):
        got = parse1("(f x)_i")
        assert got == IndexedRef(
            Apply(SymbolRef("f"), (SymbolRef("x"),)), (MarkAst(-1, "i"),)
        )

    def test_multiple_top_level_forms(self):
        assert len(parse_program("1 2 (f 3)")) == 3

    def test_unbalanced(self):
        with pytest.raises(ParseError):
            parse_program("(f 1")
        with pytest.raises(ParseError):
            parse_program("(f 1))")

    def test_stray_mark(self):
        with pytest.raises(ParseError):
            parse_program("_i")
        with pytest.raises(ParseError):
            parse_program("f _i")

    def test_mark_without_label_in_expression(self):
        with pytest.raises(ParseError):
            parse_program("(contract + v_)")

    def test_parse_errors_carry_location(self):
        with pytest.raises(ParseError) as ei:
            parse_program("(f\n")
        assert "line" in str(ei.value)


class TestDesugarDefineIndices:
    def test_labeled_define_rule(self):
        # [PAPER] (define $Γ_i_j_k E) =>
        #   (define $Γ___ (with-symbols {i j k} (transpose {i j k} E)))
        got = parse1("(define $Γ_i_j_k (f i j k))")
        want = parse1("(define $Γ___ (with-symbols {i j k} (transpose {i j k} (f i j k))))")
        assert got == want

    def test_mixed_variance(self):
        # [DERIVED: same rule at mixed variance]
        got = parse1("(define $ω~i_j E)")
        want = parse1("(define $ω~_ (with-symbols {i j} (transpose {i j} E)))")
        assert got == want

    def test_no_indices_unchanged(self):
        got = parse1("(define $x [|θ φ|])")
        assert got == Define("x", (), TensorLit((SymbolRef("θ"), SymbolRef("φ"))))

    def test_duplicate_labels(self):
        with pytest.raises(DesugarError):
            parse_program("(define $T_i_i E)")

    def test_mixed_bare_and_labeled(self):
        with pytest.raises(DesugarError):
            parse_program("(define $T_i_ E)")

    def test_integer_labels_rejected(self):
        with pytest.raises(DesugarError):
            parse_program("(define $T_1 E)")

    def test_direct_call(self):
        node = Define("R", (MarkAst(1, "i"), MarkAst(-1, "j")), SymbolRef("E"))
        got = desugar_define_indices(node)
        assert got.signature == (MarkAst(1, None), MarkAst(-1, None))
        assert isinstance(got.body, WithSymbols)


S2_PROGRAM = """
(define $x [| θ φ |])

(define $g__ [| [| r^2 0 |] [| 0 (* r^2 (sin θ)^2) |] |])
(define $g~~ [| [| (/ 1 r^2) 0 |] [| 0 (/ 1 (* r^2 (sin θ)^2)) |] |])

(define $Γ_i_j_k
  (* (/ 1 2)
     (+ (∂/∂ g_i_k x~j)
        (∂/∂ g_i_j x~k)
        (* -1 (∂/∂ g_j_k x~i)))))

(define $Γ~i_j_k (with-symbols {m} (. g~i~m Γ_m_j_k)))

(define $ω~i_j (with-symbols {k} Γ~i_j_k))

(define $Ω~i_j (with-symbols {k}
  (df-normalize (+ (d ω~i_j)
                   (wedge ω~i_k ω~k_j)))))
"""


class TestUnparse:
    def test_atoms(self):
        assert unparse(parse1("[|1 2|]_i")) == "[|1 2|]_i"
        assert unparse(parse1("x~_i")) == "x~_i"
        assert unparse(parse1("g_#_#")) == "g_#_#"
        assert unparse(parse1("r^2")) == "r^2"
        assert unparse(parse1("!(. A B)")) == "!(. A B)"

    def test_desugared_define(self):
        got = unparse(parse1("(define $Γ_i_j_k E)"))
        assert got == "(define $Γ___ (with-symbols {i j k} (transpose {i j k} E)))"

    def test_lambda(self):
        text = "(lambda [$f *$x] (derivative f x))"
        assert unparse(parse1(text)) == text

    @pytest.mark.parametrize(
        "text",
        [
            "(define $min (lambda [$x $y] (if (less-than? x y) x y)))",
            "(define $. (lambda [%t1 %t2] (contract + (* t1 t2))))",
            "(. [|1 2 3|]~i [|10 20 30|]_i)",
            "(with-symbols {j} [|[|1 2|] [|3 4|]|]_j_i)",
            "(contract + [|11 22 33|]~_i)",
            "(let {[$k (df-order A)] [$n 2]} (+ k n))",
            "(∂/∂ [|(* r (sin θ)) (* r (cos θ))|]_i [|r θ|]_j)",
            "!((flip ∂/∂) x A)",
            S2_PROGRAM,
        ],
    )
    def test_round_trip(self, text):
        # parse . unparse . parse == parse
        first = parse_program(text)
        again = parse_program("\n".join(unparse(f) for f in first))
        assert again == first

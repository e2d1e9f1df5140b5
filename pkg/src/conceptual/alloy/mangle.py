"""Identifier mangling for Alloy output.

Source identifiers never start with an underscore, so prefixing one keeps
mangled names disjoint from ordinary names and from the generated helpers
(`_init`, `_stutter`, `_can_*`, ...), which all start with `_` followed by a
name that is not a reserved word.
"""

ALLOY_KEYWORDS = frozenset(
    """
    abstract after all always and as assert before but check disj else enum eventually exactly
    expect extends fact for fun historically iden iff implies in Int int let lone module no none
    not once one open or pred private releases run seq set sig since some steps String sum this
    triggered univ until var
    """.split()
)

# Names the generated code itself declares at module level.
GENERATED = frozenset({"State"})


def mangle(name: str) -> str:
    if name in ALLOY_KEYWORDS or name in GENERATED:
        return "_" + name
    return name


def string_atom(value: str) -> str:
    """Sig name for a string literal. Letters and digits pass through; every
    other character, `_` included, becomes `_<hex>_`, which keeps it injective."""
    out = []
    for ch in value:
        if ch.isascii() and ch.isalnum():
            out.append(ch)
        else:
            out.append(f"_{ord(ch):x}_")
    return "_str_" + "".join(out)

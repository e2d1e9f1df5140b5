from .codegen import DEFAULT_SCOPE, CodegenFault, gen_app, gen_concept, generate
from .ir import AlloyDocument, serialize
from .mangle import mangle

__all__ = ["DEFAULT_SCOPE", "CodegenFault", "gen_app", "gen_concept", "generate", "AlloyDocument",
           "serialize", "mangle"]

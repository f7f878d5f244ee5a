"""Exact decompositions in congruence subgroups and Kazhdan constants of their quotients."""

from .decompose import (Decomposition, abelian_coset_word, certificate_text, corner_reduce,
                        decompose_full, residual_reduce_greedy, smith_normal_form, solve_mod,
                        verify_certificate, word_budget)
from .errors import (CapExceededError, CongrkitError, InternalInvariantError,
                     InvalidDimensionError, InvalidPositionsError, InvalidWordError,
                     NotCoprimeError, NotGeneratingError, NotUnimodularError, ParseError,
                     ToleranceError, WrongLevelError, ZeroEntryError)
from .exact_matrix import (GenSymbol, IntMatrix, Word, commutator, elementary, eval_word,
                           is_in_gamma, make_y, random_word, sigma_symbols, steinberg_check)
from .kazhdan import (KazhdanBounds, ReferenceCurves, abelian_kazhdan_exact,
                      abelian_upper_bound, congruence_kappa, cyclic_kappa, nonuniform_demo,
                      projection_upper_bound, projection_witness, relative_spectral_bound,
                      spectral_bounds)
from .quotients import (CayleyGraph, FiniteQuotientGroup, beta_generators, build_semidirect,
                        congruence_quotient, embed_el2_pair, enumerate_group, sl_elementary,
                        translation_subgroup, verify_product_decomposition)
from .stable_range import (GcdWitness, corner_gcd_witness, level_stabilize, stabilize_gcd)

__version__ = "0.1.0"

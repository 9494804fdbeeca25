"""Divergence, contraction and network experiments on Cayley graphs of finitely presented groups."""

__version__ = "0.1.0"

from .cayley import (Ball, Censored, ExtendedLength, Finite, Infinite, PathQuery,
                     ResourceLimit, avoidant_path, build_ball, distance, geodesic,
                     load_ball, nearest_point_projection, save_ball, sphere)
from .conjugacy import (ConjugacyQuery, ConjugacyResult, acylindricity_profile,
                        find_conjugator, shortest_conjugator_table)
from .divergence import (DivergenceParams, DivergenceTable, axis_divergence, div_function,
                         div_triple, small_div)
from .groups import (DefiningGraph, GroupError, GroupModel, make_cyclic_amalgam,
                     make_direct_product, make_free, make_free_product, make_gersten,
                     make_group, make_raag, make_zn, path_raag)
from .morse import (AxisSpec, contraction_profile, make_axis, morse_witness,
                    quadratic_lower_audit)
from .network import (SubgroupSpec, chain_audit, coset_patch, geodesic_cover, make_subgroup,
                      network_divergence_audit, quasiconvexity_audit)
from .order import (OrderVerdict, SampledFunction, asymp_check, asymp_search, estimate_order,
                    preceq_check, preceq_search)

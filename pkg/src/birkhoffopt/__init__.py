"""Score-induced Birkhoff decompositions, continuous extensions of
permutation functions, and Frank-Wolfe solvers for vertex-ordering
problems."""

from .core import (EPS_DS, EPS_MARGIN, EPS_ZERO, DimensionTooLargeForExactScore,
                   NotDoublyStochastic, Permutation, ScoreMatrix, barycenter,
                   from_convex_combination, perturbed_permutation_score,
                   power_score, random_convex_combination,
                   random_doubly_stochastic, random_identifying_score,
                   random_interior_doubly_stochastic, validate_doubly_stochastic)
from .decomposition import (BirkhoffDecomposition, Term, TermBudgetExceeded,
                            classical_decompose, reconstruct, score_decompose)
from .extension import (ExtensionValue, Objective, best_term, evaluate,
                        gradient, gradient_of, round_solution)
from .matching import (NoPerfectMatching, max_score_matching,
                       max_weight_matching_dense, support_mask)
from .optimizer import (EmptyPool, SolveTrace, SolverConfig, TraceRecord,
                        fw_direction, fw_step, solve_dynamic, solve_static,
                        update_score_from_pool)
from .problems import (Digraph, Graph, InstanceFileError, TooLarge, TspInstance,
                       brute_force_opt, cmp_objective, dfasp_objective,
                       gen_erdos_renyi, gen_euclidean, load_graph,
                       load_permutation, load_tsp, mst_tour, save_graph,
                       save_permutation, save_tsp, tsp_objective)
from .trees import (MaskLeak, NotInB, RootedBinaryTree, enumerate_trees,
                    forbidden_mask, in_b, lca_depth_cost, matrix_from_tree,
                    random_tree, random_w_member, tree_decompose,
                    tree_from_matrix, tree_objective)

__version__ = "0.1.0"

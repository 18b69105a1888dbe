"""Regenerate the input files and experiment configs of the shipped corpus.

Run ``python3 fixtures/generate.py`` and then ``cslab corpus --dir fixtures --update``
to refresh the golden reports.
"""
from pathlib import Path

import numpy as np

from cslab import Correspondence, Covariance, MatrixBlockAlgebra
from cslab.algebra import LinearMapOnA, TraceFunctional
from cslab.fixtures import NAMED_ACTIONS
from cslab.formats import covariance_to_json, dump_json

HERE = Path(__file__).resolve().parent


def covariances():
    C = MatrixBlockAlgebra([1], "C")
    M2 = MatrixBlockAlgebra([2], "M2")
    C2 = MatrixBlockAlgebra([1, 1], "C^2")
    tau = TraceFunctional(M2)
    swap = lambda a: C2.element([a.blocks[1], a.blocks[0]])  # noqa: E731
    p = np.diag([1.0, 0.0])
    scalar = Covariance(C, [[LinearMapOnA.identity(C)]])
    m2_trace = Covariance.from_functions(M2, [[lambda a: M2.scalar(tau(a))]])
    m2_trace.elements["p"] = M2.element([p])
    return {
        "scalar": scalar,
        "m2_identity": Covariance(M2, [[LinearMapOnA.identity(M2)]]),
        "m2_trace": m2_trace,
        "c2_swap": Covariance.from_functions(C2, [[swap]]),
    }


CONFIGS = {
    "z2_crossed": {"kind": "crossed", "inputs": {"action": "z2_swap.action.json"}, "seed": 1},
    "s3_crossed": {"kind": "crossed", "inputs": {"action": "s3_translation.action.json"}, "seed": 2,
                   "params": {"samples": 5}},
    "s3_galois": {"kind": "galois", "inputs": {"action": "s3_translation.action.json"}, "seed": 3,
                  "params": {"samples": 3}},
    "z4_galois": {"kind": "galois", "inputs": {"action": "z4_translation.action.json"}, "seed": 4,
                  "params": {"samples": 3}},
    "z2_freeness": {"kind": "freeness", "inputs": {"action": "z2_swap.action.json"}, "seed": 5,
                    "params": {"expect": "free", "budget": 200}},
    "z2_trivial_freeness": {"kind": "freeness", "inputs": {"action": "z2_trivial.action.json"}, "seed": 6,
                            "params": {"expect": "not_free", "threshold": 0.4, "budget": 300}},
    "s3_simplicity": {"kind": "simplicity", "inputs": {"action": "s3_translation.action.json"},
                      "params": {"expect_simple": True}},
    "z2_trivial_simplicity": {"kind": "simplicity", "inputs": {"action": "z2_trivial.action.json"},
                              "params": {"expect_simple": False}},
    "scalar_moments": {"kind": "fock", "inputs": {"covariance": "scalar.covariance.json"},
                       "params": {"depth": 6, "checks": ["identity", "moment", "span"],
                                  "words": ["X", "X X", "X X X X", "X X X X X X"],
                                  "expected": {"X": 0, "X X": 1, "X X X X": 2, "X X X X X X": 5}}},
    "m2_trace_fock": {"kind": "fock", "inputs": {"covariance": "m2_trace.covariance.json"}, "seed": 7,
                      "params": {"depth": 2, "checks": ["identity", "moment", "central", "span", "traciality"],
                                 "words": ["X p X", "p X X p"]}},
    "m2_identity_fgp": {"kind": "fock", "inputs": {"covariance": "m2_identity.covariance.json"}, "seed": 8,
                        "params": {"depth": 2, "checks": ["identity", "span", "fgp"], "trials": 50}},
    "c2_swap_central": {"kind": "fock", "inputs": {"covariance": "c2_swap.covariance.json"},
                        "params": {"depth": 1, "checks": ["central"]}},
    "m2_mostow": {"kind": "mostow", "inputs": {"correspondence": "m2_trivial.correspondence.json"}, "seed": 9,
                  "params": {"side": "right", "trials": 200}},
    "cm2_fusion": {"kind": "fusion", "inputs": {"correspondences": [
        "cm2_block01.correspondence.json", "cm2_block10.correspondence.json", "cm2_block01.correspondence.json"],
        "target": "cm2_block00.correspondence.json"}},
}


def main():
    for name, make in NAMED_ACTIONS.items():
        dump_json(make().to_json(), HERE / f"{name}.action.json")
    for name, cov in covariances().items():
        dump_json(covariance_to_json(cov), HERE / f"{name}.covariance.json")
    M2 = MatrixBlockAlgebra([2], "M2")
    CM2 = MatrixBlockAlgebra([1, 2], "C+M2")
    dump_json(Correspondence.trivial(M2).to_json(), HERE / "m2_trivial.correspondence.json")
    for i, j in [(0, 0), (0, 1), (1, 0)]:
        dump_json(Correspondence.block(CM2, i, j).to_json(), HERE / f"cm2_block{i}{j}.correspondence.json")
    for name, cfg in CONFIGS.items():
        dump_json(cfg, HERE / f"{name}.config.json")


if __name__ == "__main__":
    main()

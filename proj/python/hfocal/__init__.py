from ._hfocal import (
    FocalCase,
    FocalSolution,
    HfocalError,
    dlt_homography,
    estimate,
    focal_from_fov,
    fov_from_focal,
    generate_scene,
    maa,
    parse_case,
    solve,
    verify_generators,
    xi_f,
    xi_pair,
)

__all__ = [
    "FocalCase",
    "FocalSolution",
    "HfocalError",
    "dlt_homography",
    "estimate",
    "focal_from_fov",
    "fov_from_focal",
    "generate_scene",
    "maa",
    "parse_case",
    "solve",
    "verify_generators",
    "xi_f",
    "xi_pair",
]

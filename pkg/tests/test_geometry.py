"""Array builders: stripe pattern, rectangular sublattices, pixels, CSV."""

import numpy as np
import pytest

from coopdipole.core import SpeciesParams
from coopdipole.errors import ConfigError
from coopdipole.geometry import (
    AtomArray,
    PixelLayout,
    PixelSpec,
    build_pixel_superarray,
    build_single_species_rectangle,
    build_stripe_array,
    load_csv,
    save_csv,
    species_couplings,
)

from helpers import stripe_labels_reference


def _position_set(positions, decimals=9):
    return {tuple(np.round(p, decimals)) for p in positions}


def _centered(positions):
    return positions - positions.mean(axis=0)


def test_two_by_two_unrolled():
    arr = build_stripe_array(2, 2, 0.4)
    assert len(arr) == 4
    assert list(arr.species) == ["A", "A", "B", "B"]
    expected = {(-0.2, -0.2, 0.0), (0.2, -0.2, 0.0),
                (-0.2, 0.2, 0.0), (0.2, 0.2, 0.0)}
    assert _position_set(arr.positions) == expected


def test_reference_array_counts():
    arr = build_stripe_array(26, 26, 0.4)
    assert arr.n_atoms == 676
    assert arr.count("A") == 338
    assert arr.count("B") == 338


def test_stripe_labels_match_reference():
    for n_x, n_y, swap in ((5, 4, False), (3, 7, True), (8, 8, False)):
        arr = build_stripe_array(n_x, n_y, 0.3, swap=swap)
        assert list(arr.species) == stripe_labels_reference(n_x, n_y, swap)


def test_sublattice_translation():
    # Each B row sits one lattice constant above its A row, so for even
    # n_y the A set shifted by (0, a, 0) lands exactly on the B set.
    a = 0.4
    arr = build_stripe_array(6, 6, a)
    pos_a = arr.positions[arr.species == "A"]
    pos_b = arr.positions[arr.species == "B"]
    shifted = pos_a + np.array([0.0, a, 0.0])
    assert _position_set(shifted) == _position_set(pos_b)


def test_rectangle_matches_a_sublattice():
    # The A atoms of the stripe array form a rectangular (a, 2a) lattice.
    # The standalone rectangle builder is centered while the sublattice
    # keeps the parent's centering, so compare both after centering.
    a = 0.4
    stripe = build_stripe_array(26, 26, a)
    rect = build_single_species_rectangle(26, 13, a, 2 * a)
    sub = stripe.positions[stripe.species == "A"]
    assert _position_set(_centered(sub)) == _position_set(_centered(rect.positions))
    assert set(rect.species) == {"A"}


def test_rectangle_trivial_cases():
    single = build_single_species_rectangle(1, 1, 0.7, 0.9)
    assert single.n_atoms == 1
    assert np.all(single.positions[0] == 0.0)

    square = build_single_species_rectangle(3, 3, 0.5, 0.5)
    assert square.n_atoms == 9
    xs = np.unique(np.round(square.positions[:, 0], 12))
    assert np.allclose(xs, [-0.5, 0.0, 0.5])


def test_builders_center_and_planar():
    for arr in (
        build_stripe_array(5, 4, 0.3),
        build_single_species_rectangle(4, 7, 0.3, 0.6),
        build_pixel_superarray(
            PixelLayout(((PixelSpec(4, "x"), PixelSpec(4, "y")),),
                        isolation_width=2), 0.4),
    ):
        assert np.abs(arr.positions.mean(axis=0)).max() < 1e-12
        assert np.all(arr.positions[:, 2] == 0.0)


def test_species_blind_geometry():
    # Erasing the labels leaves the plain square lattice.
    a = 0.25
    stripe = build_stripe_array(7, 7, a)
    square = build_single_species_rectangle(7, 7, a, a)
    assert np.allclose(stripe.positions, square.positions)


def test_min_pairwise_distance():
    arr = build_stripe_array(8, 8, 0.4)
    diff = arr.positions[:, None, :] - arr.positions[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    dist[np.arange(len(arr)), np.arange(len(arr))] = np.inf
    assert dist.min() >= 0.4 - 1e-9


def test_pixel_superarray_demo_layout():
    layout = PixelLayout(
        (
            (PixelSpec(30, "x"), PixelSpec(30, "y")),
            (PixelSpec(30, "y"), PixelSpec(30, "x")),
        ),
        isolation_width=11,
        fill_species="A",
    )
    assert layout.side_x == 71 and layout.side_y == 71
    arr = build_pixel_superarray(layout, 0.4)
    assert arr.n_atoms == 71 * 71

    # Isolation sites all carry the fill species; count them directly.
    n_iso = 71 * 71 - 4 * 30 * 30
    counts = {s: arr.count(s) for s in "AB"}
    # Within a 30-row stripe pixel: 15 A rows, 15 B rows (balanced), so
    # the species imbalance comes from the isolation region alone.
    assert counts["A"] - counts["B"] == n_iso
    assert counts["A"] + counts["B"] == 71 * 71


def test_single_pixel_reduces_to_stripe():
    layout = PixelLayout(((PixelSpec(6, "x"),),), isolation_width=0)
    pix = build_pixel_superarray(layout, 0.4)
    stripe = build_stripe_array(6, 6, 0.4)
    assert np.allclose(pix.positions, stripe.positions)
    assert list(pix.species) == list(stripe.species)


def test_swapped_pixels_complementary():
    plain = build_pixel_superarray(
        PixelLayout(((PixelSpec(4, "x", False),),)), 0.4)
    swapped = build_pixel_superarray(
        PixelLayout(((PixelSpec(4, "x", True),),)), 0.4)
    flip = {"A": "B", "B": "A"}
    assert [flip[s] for s in plain.species] == list(swapped.species)


def test_pixel_orientation_transposes():
    # A y-oriented pixel alternates species along columns instead of rows.
    layout = PixelLayout(((PixelSpec(4, "y"),),))
    arr = build_pixel_superarray(layout, 0.5)
    labels = np.array(arr.species).reshape(4, 4)
    for col in range(4):
        assert len(set(labels[:, col])) == 1
    assert labels[0, 0] == "A" and labels[0, 1] == "B"


def test_species_couplings_selection():
    arr = build_stripe_array(4, 4, 0.4)
    g = species_couplings(arr, SpeciesParams("A", 0.0), SpeciesParams("B", 0.5))
    mask_a = arr.species == "A"
    assert np.all(g[mask_a] == 3.0j)
    assert np.all(g[~mask_a] == SpeciesParams("B", 0.5).coupling)


def test_species_couplings_symmetric_pair():
    arr = build_stripe_array(4, 4, 0.4)
    g = species_couplings(arr, SpeciesParams("A", 0.5), SpeciesParams("B", -0.5))
    mask_a = arr.species == "A"
    assert np.all(g[mask_a] == -np.conj(g[~mask_a]))


def test_far_detuned_species_transparent():
    arr = build_stripe_array(4, 4, 0.4)
    g = species_couplings(arr, SpeciesParams("A", 0.0),
                          SpeciesParams("B", -1e6))
    assert np.abs(g[arr.species == "B"]).max() < 3e-6


def test_csv_round_trip(tmp_path):
    arr = build_pixel_superarray(
        PixelLayout(((PixelSpec(5, "x"), PixelSpec(5, "y")),),
                    isolation_width=3), 0.35)
    path = tmp_path / "array.csv"
    save_csv(arr, path)
    back = load_csv(path)
    assert np.array_equal(back.positions, arr.positions)
    assert list(back.species) == list(arr.species)
    assert abs(back.lattice_constant - 0.35) < 1e-12


def test_builder_validation():
    with pytest.raises(ConfigError):
        build_stripe_array(0, 3, 0.4)
    with pytest.raises(ConfigError):
        build_stripe_array(3, 3, -0.1)
    with pytest.raises(ConfigError):
        build_single_species_rectangle(2, 2, 0.4, 0.4, species="X")
    with pytest.raises(ConfigError):
        PixelLayout(((PixelSpec(4, "x"), PixelSpec(5, "x")),))
    with pytest.raises(ConfigError):
        PixelSpec(4, "z")
    with pytest.raises(ConfigError):
        AtomArray(np.zeros((2, 3)), np.array(["A", "Q"]), 0.4)

"""
Image I/O Test Script
Tests PGM decoding, bilinear rescaling, manifests and class composition.
"""
import numpy as np
import pytest

from gaborkeca.exceptions import (
    DuplicateEntryError,
    ImageNotFoundError,
    MalformedHeaderError,
    ManifestError,
    ParameterError,
    TruncatedDataError,
    UnknownRoleError,
    UnreadableImageError,
    UnsupportedMaxvalError,
)
from gaborkeca.imageio import (
    GrayImage,
    Role,
    compose_classes,
    decode_pgm,
    load_manifest,
    load_pgm,
    resize_bilinear,
    save_pgm,
    to_uint8_rescaled,
)


def test_decode_ascii_pgm():
    img = decode_pgm(b"P2 2 2 255\n0 128 255 64\n")
    assert (img.width, img.height) == (2, 2)
    assert img.pixels.tolist() == [0, 128, 255, 64]


def test_decode_binary_single_pixel():
    img = decode_pgm(b"P5\n1 1\n255\n\x00")
    assert (img.width, img.height) == (1, 1)
    assert img.pixels.tolist() == [0]


def test_header_comments_are_skipped():
    img = decode_pgm(b"P2\n# written by hand\n2 1\n# maxval next\n255\n7 9\n")
    assert img.pixels.tolist() == [7, 9]


def test_truncated_pixel_data():
    with pytest.raises(TruncatedDataError):
        decode_pgm(b"P5\n2 2\n255\n\x01\x02\x03")
    with pytest.raises(TruncatedDataError):
        decode_pgm(b"P2\n2 2\n255\n1 2 3\n")


def test_malformed_and_unsupported_headers():
    with pytest.raises(MalformedHeaderError):
        decode_pgm(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(MalformedHeaderError):
        decode_pgm(b"P2\n2 x\n255\n")
    with pytest.raises(UnsupportedMaxvalError):
        decode_pgm(b"P2\n1 1\n65535\n0\n")


def test_missing_file(tmp_path):
    with pytest.raises(ImageNotFoundError) as err:
        load_pgm(tmp_path / "nope.pgm")
    assert isinstance(err.value, FileNotFoundError)


def test_save_and_load_both_encodings(tmp_path):
    img = GrayImage.from_array(np.array([[0, 17, 255], [64, 128, 3]], dtype=float))
    for binary in (True, False):
        path = tmp_path / f"img_{binary}.pgm"
        save_pgm(img, path, binary=binary)
        back = load_pgm(path)
        assert np.array_equal(back.data, img.data)


def test_save_rejects_fractional_intensities(tmp_path):
    img = GrayImage.from_array(np.array([[0.5, 1.0]]))
    with pytest.raises(ParameterError):
        save_pgm(img, tmp_path / "x.pgm")


def test_gray_image_range_is_enforced():
    with pytest.raises(ParameterError):
        GrayImage.from_array(np.array([[0.0, 256.0]]))
    with pytest.raises(ParameterError):
        GrayImage(width=2, height=2, data=[1, 2, 3])


def test_rescale_to_uint8():
    img = to_uint8_rescaled(np.array([[-1.0, 0.0], [1.0, 3.0]]))
    assert img.data.min() == 0 and img.data.max() == 255
    assert to_uint8_rescaled(np.full((2, 2), 5.0)).data.max() == 0


# --- resize ---------------------------------------------------------------

def test_resize_constant_image():
    img = GrayImage.from_array(np.full((5, 4), 77.0))
    out = resize_bilinear(img, 9, 3)
    assert (out.width, out.height) == (9, 3)
    assert np.all(out.data == 77.0)


def test_resize_identity_is_pixel_identical():
    img = GrayImage.from_array(np.arange(12, dtype=float).reshape(3, 4))
    assert np.array_equal(resize_bilinear(img, 4, 3).data, img.data)


def test_resize_endpoint_aligned_interpolation():
    img = GrayImage.from_array(np.array([[0.0, 100.0]]))
    out = resize_bilinear(img, 3, 1)
    assert out.pixels.tolist() == [0.0, 50.0, 100.0]


def test_resize_to_single_sample_takes_source_origin():
    img = GrayImage.from_array(np.array([[10.0, 20.0], [30.0, 40.0]]))
    assert resize_bilinear(img, 1, 1).pixels.tolist() == [10.0]


def test_resize_stays_within_input_range():
    rng = np.random.default_rng(3)
    img = GrayImage.from_array(rng.uniform(20, 200, (11, 7)))
    out = resize_bilinear(img, 23, 5)
    assert out.data.min() >= img.data.min()
    assert out.data.max() <= img.data.max()


def test_resize_rejects_zero_target():
    img = GrayImage.from_array(np.zeros((2, 2)))
    with pytest.raises(ParameterError):
        resize_bilinear(img, 0, 2)


# --- manifests ------------------------------------------------------------

def _write_images(tmp_path, names):
    for name in names:
        save_pgm(GrayImage.from_array(np.full((4, 6), 9.0)), tmp_path / name)


def test_load_manifest(tmp_path):
    _write_images(tmp_path, ["a.pgm", "b.pgm", "c.pgm"])
    manifest = tmp_path / "m.csv"
    manifest.write_text(
        "path,label,role\na.pgm,s1,train\nb.pgm,s1,positive-test\nc.pgm,s2,negative-test\n", encoding="utf-8"
    )
    dataset = load_manifest(manifest, width=8, height=10)
    assert len(dataset) == 3
    assert [e.role for e in dataset] == [Role.TRAIN, Role.POSITIVE, Role.NEGATIVE]
    assert all((e.image.width, e.image.height) == (8, 10) for e in dataset)
    assert dataset.class_labels == ("s1",)


def test_manifest_header_only(tmp_path):
    manifest = tmp_path / "m.csv"
    manifest.write_text("path,label,role\n", encoding="utf-8")
    assert len(load_manifest(manifest)) == 0


def test_manifest_errors(tmp_path):
    _write_images(tmp_path, ["a.pgm"])
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("file,label,role\na.pgm,s1,train\n", encoding="utf-8")
    with pytest.raises(ManifestError):
        load_manifest(bad_header)

    unknown = tmp_path / "u.csv"
    unknown.write_text("path,label,role\na.pgm,s1,probe\n", encoding="utf-8")
    with pytest.raises(UnknownRoleError):
        load_manifest(unknown)

    duplicate = tmp_path / "d.csv"
    duplicate.write_text("path,label,role\na.pgm,s1,train\na.pgm,s2,train\n", encoding="utf-8")
    with pytest.raises(DuplicateEntryError):
        load_manifest(duplicate)

    missing = tmp_path / "x.csv"
    missing.write_text("path,label,role\nmissing.pgm,s1,train\n", encoding="utf-8")
    with pytest.raises(UnreadableImageError) as err:
        load_manifest(missing)
    assert "missing.pgm" in err.value.context["path"]


def test_compose_classes_is_seeded():
    images = {f"s{i}": [GrayImage.from_array(np.full((2, 2), float(10 * i + j))) for j in range(6)] for i in range(3)}
    held_out = {f"s{i}": [GrayImage.from_array(np.full((2, 2), float(10 * i + j))) for j in range(2)] for i in (3, 4)}
    first = compose_classes(images, n_train=4, n_impostors=2, seed=11, impostor_pool=held_out)
    again = compose_classes(images, n_train=4, n_impostors=2, seed=11, impostor_pool=held_out)

    assert len(first.by_role(Role.TRAIN)) == 12
    assert len(first.by_role(Role.POSITIVE)) == 6
    assert len(first.by_role(Role.NEGATIVE)) == 6
    assert [(e.label, e.image.data[0, 0]) for e in first] == [(e.label, e.image.data[0, 0]) for e in again]

    with pytest.raises(ParameterError):
        compose_classes(images, n_train=6, n_impostors=0, seed=0)


def test_compose_classes_keeps_impostors_out_of_the_class_set():
    images = {f"s{i}": [GrayImage.from_array(np.full((2, 2), float(10 * i + j))) for j in range(4)] for i in range(4)}
    enrolled = {label: images[label] for label in ("s0", "s1")}
    held_out = {label: images[label] for label in ("s2", "s3")}

    dataset = compose_classes(enrolled, n_train=2, n_impostors=3, seed=0, impostor_pool=held_out)
    negative_labels = {e.label for e in dataset.by_role(Role.NEGATIVE)}
    assert negative_labels <= {"s2", "s3"}
    assert negative_labels.isdisjoint(dataset.class_labels)

    with pytest.raises(ParameterError) as err:
        compose_classes(enrolled, n_train=2, n_impostors=1, seed=0, impostor_pool=images)
    assert err.value.context["labels"] == ["s0", "s1"]

    with pytest.raises(ParameterError):
        compose_classes(enrolled, n_train=2, n_impostors=1, seed=0)
    assert len(compose_classes(enrolled, n_train=2, n_impostors=0, seed=0).by_role(Role.NEGATIVE)) == 0

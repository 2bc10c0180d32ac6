import tempfile
import unittest
from pathlib import Path

import numpy as np
import numpy.testing as npt

from config.run_config import EncoderConfig, RunConfig
from losses import supervised_loss
from models import FORMAT_VERSION, DualModel, FusionConnector, SegmentationBranch, load_checkpoint, restore_model, save_checkpoint
from numerics import Tensor, fresh_tape
from utils.errors import CheckpointError, ConfigError, ContractError, ShapeError


def tiny_model(seed=0, fusion_mode="add", fusion_detach=True, senior_width=4, junior_width=2, num_stages=2):
    return DualModel(
        senior=EncoderConfig(base_width=senior_width, num_stages=num_stages),
        junior=EncoderConfig(base_width=junior_width, num_stages=num_stages),
        num_classes=4,
        fusion_mode=fusion_mode,
        fusion_detach=fusion_detach,
        seed=seed,
    )


class DualModelForwardTest(unittest.TestCase):

    def test_output_shapes(self):
        model = DualModel(EncoderConfig(base_width=16), EncoderConfig(base_width=8), num_classes=4)
        out = model.forward_dual(np.random.default_rng(0).random((1, 3, 16, 16)))
        self.assertEqual(out.senior_logits.shape, (1, 4, 16, 16))
        self.assertEqual(out.junior_logits.shape, (1, 4, 16, 16))
        self.assertEqual(len(out.junior_features), 3)

    def test_zero_fusion_equals_plain_senior(self):
        images = np.random.default_rng(1).random((2, 3, 8, 8))
        fused = tiny_model(seed=3, fusion_mode="add")
        plain = tiny_model(seed=3, fusion_mode="none")
        npt.assert_array_equal(fused.forward_senior(images).data, plain.forward_senior(images).data)

    def test_concat_fusion_starts_as_identity(self):
        images = np.random.default_rng(2).random((1, 3, 8, 8))
        fused = tiny_model(seed=4, fusion_mode="concat")
        plain = tiny_model(seed=4, fusion_mode="none")
        npt.assert_allclose(fused.forward_senior(images).data, plain.forward_senior(images).data, atol=1e-12)

    def test_junior_forward_is_deterministic(self):
        model = tiny_model(seed=5)
        images = np.random.default_rng(3).random((1, 3, 8, 8))
        npt.assert_array_equal(model.forward_junior(images).data, model.forward_junior(images).data)

    def test_same_seed_same_weights(self):
        a, b = tiny_model(seed=7), tiny_model(seed=7)
        for (name, x), (_, y) in zip(a.state_dict().items(), b.state_dict().items()):
            npt.assert_array_equal(x, y, err_msg=name)

    def test_constant_net_on_constant_image(self):
        branch = SegmentationBranch(
            "junior", EncoderConfig(base_width=2, num_stages=2, kernel_size=1), 3, np.random.default_rng(0)
        )
        for t in branch.named_parameters().values():
            t.data[...] = 0.3
        logits, _ = branch.forward(Tensor(np.full((1, 3, 8, 8), 0.5)))
        for c in range(3):
            npt.assert_allclose(logits.data[0, c], logits.data[0, c, 0, 0])

    def test_input_contract(self):
        model = tiny_model()
        with self.assertRaises(ShapeError):
            model.forward_dual(np.zeros((1, 1, 8, 8)))
        with self.assertRaises(ConfigError):
            model.forward_dual(np.zeros((1, 3, 10, 8)))

    def test_fusion_rejects_unequal_stages(self):
        with self.assertRaises(ConfigError):
            FusionConnector((2, 4), (4, 8, 16), mode="add")
        with self.assertRaises(ConfigError):
            FusionConnector((2,), (4,), mode="sum")


class ParameterTest(unittest.TestCase):

    def test_junior_parameter_count_closed_form(self):
        branch = SegmentationBranch("junior", EncoderConfig(base_width=16, num_stages=3), 4, np.random.default_rng(0))
        widths = [16, 32, 64]
        expected = 0
        in_channels = 3
        for w in widths:
            expected += w * in_channels * 9 + w * w * 9
            in_channels = w
        expected += 4 * 64
        self.assertEqual(expected, 72112)
        self.assertEqual(branch.parameter_count(), expected)

    def test_hetero_senior_is_larger(self):
        counts = DualModel.from_config(RunConfig()).parameter_counts()
        self.assertGreater(counts["senior"], counts["junior"])

    def test_parameter_groups(self):
        groups = tiny_model().parameter_groups()
        self.assertEqual(list(groups), ["senior.encoder", "senior.decoder", "junior.encoder", "junior.decoder"])
        self.assertIn("fusion.stage0", [t.name for t in groups["senior.decoder"]])

    def test_detached_fusion_keeps_senior_loss_out_of_junior(self):
        model = tiny_model(seed=2, fusion_detach=True)
        model.fusion.projections[0].data[...] = 0.5
        rng = np.random.default_rng(4)
        images, labels = rng.random((1, 3, 8, 8)), rng.integers(0, 4, size=(1, 8, 8))
        with fresh_tape():
            model.zero_grad()
            supervised_loss(model.forward_dual(images).senior_logits, labels).backward()
        for t in model.junior.named_parameters().values():
            self.assertIsNone(t.grad, t.name)
        self.assertIsNotNone(model.senior.classifier.grad)

    def test_attached_fusion_reaches_junior(self):
        model = tiny_model(seed=2, fusion_detach=False)
        model.fusion.projections[0].data[...] = 0.5
        rng = np.random.default_rng(4)
        images, labels = rng.random((1, 3, 8, 8)), rng.integers(0, 4, size=(1, 8, 8))
        with fresh_tape():
            model.zero_grad()
            supervised_loss(model.forward_dual(images).senior_logits, labels).backward()
        self.assertIsNotNone(model.junior.encoder.kernels[0]["down"].grad)

    def test_senior_weights_do_not_touch_junior_gradients(self):
        rng = np.random.default_rng(5)
        images, labels = rng.random((2, 3, 8, 8)), rng.integers(0, 4, size=(2, 8, 8))
        grads, logits = [], []
        for scale in (1.0, -3.0):
            model = tiny_model(seed=3, fusion_detach=False)
            model.fusion.projections[0].data[...] = 0.5
            for t in model.senior.named_parameters().values():
                t.data[...] = t.data * scale + 0.1
            with fresh_tape():
                model.zero_grad()
                out = model.forward_dual(images)
                supervised_loss(out.junior_logits, labels).backward()
            logits.append(out.junior_logits.data)
            grads.append({name: None if t.grad is None else t.grad.copy() for name, t in model.junior.named_parameters().items()})
            for t in model.senior.named_parameters().values():
                self.assertIsNone(t.grad, t.name)
        npt.assert_array_equal(logits[0], logits[1])
        for name in grads[0]:
            npt.assert_array_equal(grads[0][name], grads[1][name], err_msg=name)

    def test_drop_senior(self):
        model = tiny_model()
        model.drop_senior()
        self.assertFalse(model.has_senior)
        self.assertEqual(list(model.parameter_groups()), ["junior.encoder", "junior.decoder"])
        self.assertEqual(model.forward_junior(np.zeros((1, 3, 8, 8))).shape, (1, 4, 8, 8))
        with self.assertRaises(ContractError):
            model.forward_senior(np.zeros((1, 3, 8, 8)))


class CheckpointTest(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / "ckpt.final"

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip_is_bit_exact(self):
        source = tiny_model(seed=1)
        save_checkpoint(self.path, source, meta={"iteration": 3})
        target = tiny_model(seed=2)
        checkpoint = load_checkpoint(self.path)
        restore_model(checkpoint, target)
        self.assertEqual(checkpoint.meta["iteration"], 3)
        for name, values in source.state_dict().items():
            npt.assert_array_equal(target.state_dict()[name], values, err_msg=name)

    def test_optimizer_slots_round_trip(self):
        rng = np.random.default_rng(6)
        moments = {
            "m": {"junior.classifier": rng.normal(size=(4, 2))},
            "v": {"junior.classifier": rng.random((4, 2))},
            "t": {"junior.classifier": np.array(7, dtype=np.int64)},
        }
        save_checkpoint(self.path, tiny_model(), moments=moments)
        checkpoint = load_checkpoint(self.path)
        self.assertEqual(sorted(checkpoint.moments), ["m", "t", "v"])
        step = checkpoint.moments["t"]["junior.classifier"]
        self.assertEqual(step.dtype, np.int64)
        self.assertEqual(int(step), 7)
        npt.assert_array_equal(checkpoint.moments["m"]["junior.classifier"], moments["m"]["junior.classifier"])
        self.assertEqual(load_checkpoint(self.path, junior_only=True).moments, {})

    def test_junior_only_load(self):
        source = tiny_model(seed=1)
        save_checkpoint(self.path, source)
        checkpoint = load_checkpoint(self.path, junior_only=True)
        self.assertTrue(all(name.startswith("junior.") for name in checkpoint.params))
        target = tiny_model(seed=9)
        target.drop_senior()
        restore_model(checkpoint, target)
        images = np.random.default_rng(0).random((1, 3, 8, 8))
        npt.assert_array_equal(target.forward_junior(images).data, source.forward_junior(images).data)

    def test_version_mismatch_names_both_versions(self):
        save_checkpoint(self.path, tiny_model())
        with np.load(self.path) as archive:
            records = {key: archive[key] for key in archive.files}
        records["__format__"] = np.array([FORMAT_VERSION + 1], dtype=np.int64)
        with open(self.path, "wb") as fh:
            np.savez(fh, **records)
        with self.assertRaises(CheckpointError) as ctx:
            load_checkpoint(self.path)
        self.assertIn(str(FORMAT_VERSION + 1), str(ctx.exception))
        self.assertIn(str(FORMAT_VERSION), str(ctx.exception))

    def test_shape_mismatch(self):
        save_checkpoint(self.path, tiny_model(senior_width=4))
        with self.assertRaises(CheckpointError):
            restore_model(load_checkpoint(self.path), tiny_model(senior_width=8))

    def test_missing_file(self):
        with self.assertRaises(CheckpointError):
            load_checkpoint(self.path)


if __name__ == '__main__':
    unittest.main()

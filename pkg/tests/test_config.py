import tempfile
import unittest
from pathlib import Path

from config import (
    PRESETS,
    RunConfig,
    apply_overrides,
    dump_config,
    flatten_config,
    load_config,
    parse_config_text,
    preset_variants,
    write_config,
)
from config.run_config import EvalConfig, Thresholds
from training.ablation import variant_configs
from utils.errors import ConfigError


class DefaultsTest(unittest.TestCase):

    def test_defaults(self):
        config = RunConfig()
        self.assertEqual(config.scene.image_size, (64, 64))
        self.assertEqual(config.scene.num_classes, 4)
        self.assertEqual(config.split.ratio, "1/8")
        self.assertEqual(config.loss.weights.lambda1, 1.0)
        self.assertEqual(config.loss.thresholds.conf_tau, 0.95)
        self.assertEqual(config.optim.decoder_lr_multiplier, 10.0)
        self.assertEqual(config.model.pairing, "hetero")
        self.assertEqual(config.scene.noise_sigma, 0.25)
        self.assertEqual(config.loss.rampup_fraction, 0.3)

    def test_resolved_writes_inherited_values(self):
        resolved = apply_overrides(RunConfig(), {"seed": 7}).resolved()
        self.assertEqual(resolved.scene.seed, 7)
        self.assertEqual(resolved.split.seed, 7)
        self.assertEqual(resolved.eval.divisor, 8)
        self.assertEqual(resolved.eval.stride, 16)

    def test_explicit_seeds_win(self):
        config = apply_overrides(RunConfig(), {"seed": 7, "scene.seed": 3})
        self.assertEqual(config.scene_seed, 3)
        self.assertEqual(config.split_seed, 7)

    def test_window_stride(self):
        self.assertEqual(EvalConfig(window=32).window_stride, 16)
        self.assertEqual(EvalConfig(window=32, stride=8).window_stride, 8)
        with self.assertRaises(ValueError):
            EvalConfig(window=8, stride=16)


class OverrideTest(unittest.TestCase):

    def test_values_are_coerced(self):
        config = apply_overrides(RunConfig(), {
            "scene.image_size": "32,48",
            "loss.weights.lambda3": "0.5",
            "train.augment": "false",
            "optim.total_iters": "none",
        })
        self.assertEqual(config.scene.image_size, (32, 48))
        self.assertEqual(config.loss.weights.lambda3, 0.5)
        self.assertFalse(config.train.augment)
        self.assertIsNone(config.optim.total_iters)

    def test_invalid_value_names_field(self):
        with self.assertRaises(ConfigError) as ctx:
            apply_overrides(RunConfig(), {"scene.num_classes": 1})
        self.assertEqual(ctx.exception.field, "scene.num_classes")
        self.assertEqual(ctx.exception.exit_code, 2)

    def test_unknown_ratio(self):
        with self.assertRaises(ConfigError) as ctx:
            apply_overrides(RunConfig(), {"split.ratio": "1/3"})
        self.assertIn("1/3", str(ctx.exception))

    def test_unknown_keys(self):
        with self.assertRaises(ConfigError) as ctx:
            apply_overrides(RunConfig(), {"scene.colour": "red"})
        self.assertEqual(ctx.exception.field, "scene.colour")
        with self.assertRaises(ConfigError):
            apply_overrides(RunConfig(), {"nosuch.section": 1})
        with self.assertRaises(ConfigError) as ctx:
            apply_overrides(RunConfig(), {"seed.value": 1})
        self.assertEqual(ctx.exception.field, "seed")

    def test_pairing_and_stride_checks(self):
        with self.assertRaises(ConfigError):
            apply_overrides(RunConfig(), {"model.pairing": "homo"})
        with self.assertRaises(ConfigError):
            apply_overrides(RunConfig(), {"junior.base_width": 32})
        with self.assertRaises(ConfigError):
            apply_overrides(RunConfig(), {"scene.image_size": "60,64"})
        with self.assertRaises(ConfigError):
            apply_overrides(RunConfig(), {"junior.num_stages": 2})
        config = apply_overrides(RunConfig(), {"junior.num_stages": 2, "model.fusion_mode": "none"})
        self.assertEqual(config.output_stride, 8)

    def test_conf_tau_clamp(self):
        self.assertEqual(apply_overrides(RunConfig(), {"loss.thresholds.conf_tau": 1.2}).loss.thresholds.conf_tau, 1.0)
        self.assertEqual(Thresholds(conf_tau=0.0).conf_tau, 0.0)
        with self.assertRaises(ConfigError):
            apply_overrides(RunConfig(), {"loss.thresholds.kd_temperature": 0})


class ConfigFileTest(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip(self):
        config = apply_overrides(RunConfig(), {
            "seed": 11, "scene.noise_sigma": 0.125, "optim.base_lr": 3e-4, "model.fusion_mode": "concat",
        }).resolved()
        path = write_config(config, self.root / "config.resolved")
        reloaded = load_config(path)
        self.assertEqual(reloaded, config)
        self.assertEqual(dump_config(reloaded), path.read_text())

    def test_format(self):
        text = dump_config(RunConfig())
        self.assertIn("scene.image_size = 64,64\n", text)
        self.assertIn("scene.seed = none\n", text)
        self.assertIn("train.augment = true\n", text)
        self.assertEqual(len(text.splitlines()), len(flatten_config(RunConfig())))

    def test_comments_and_blank_lines(self):
        entries = parse_config_text("# header\n\nseed = 3  # trailing\nsplit.ratio = 1/4\n")
        self.assertEqual(entries, {"seed": "3", "split.ratio": "1/4"})

    def test_malformed_line(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config_text("seed = 1\nthis line has no assignment\n", source="run.cfg")
        self.assertIn("run.cfg:2", str(ctx.exception))
        with self.assertRaises(ConfigError):
            parse_config_text("= 4\n")

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config(self.root / "absent.cfg")

    def test_file_on_top_of_base(self):
        path = self.root / "run.cfg"
        path.write_text("train.epochs = 9\n")
        base = apply_overrides(RunConfig(), {"train.batch_size": 2})
        config = load_config(path, base=base)
        self.assertEqual((config.train.epochs, config.train.batch_size), (9, 2))


class PresetTest(unittest.TestCase):

    def test_known_presets(self):
        self.assertEqual(sorted(PRESETS), ["table5", "table6", "table7"])

    def test_component_variants(self):
        variants = dict(preset_variants("table5", RunConfig()))
        self.assertEqual(list(variants), ["sup", "sup_con", "sup_con_kd"])
        self.assertEqual(variants["sup"], {"loss.weights.lambda2": 0.0, "loss.weights.lambda3": 0.0})

    def test_pairing_and_capacity_scale_with_junior(self):
        base = apply_overrides(RunConfig(), {"junior.base_width": 4, "senior.base_width": 4})
        pairing = dict(preset_variants("table6", base))
        self.assertEqual(pairing["hetero"]["senior.base_width"], 8)
        self.assertEqual(pairing["homo"]["senior.base_width"], 4)
        capacity = dict(preset_variants("table7", base))
        self.assertEqual([v["senior.base_width"] for v in capacity.values()], [8, 16])

    def test_variant_configs(self):
        pairs = variant_configs("table6", RunConfig(), seed=5, out_root=Path("runs/t6"))
        self.assertEqual([name for name, _ in pairs], ["hetero", "homo"])
        homo = dict(pairs)["homo"]
        self.assertEqual(homo.senior.base_width, homo.junior.base_width)
        self.assertEqual(homo.seed, 5)
        self.assertEqual(Path(homo.out_dir), Path("runs/t6/homo/seed5"))

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError) as ctx:
            preset_variants("table9", RunConfig())
        self.assertEqual(ctx.exception.field, "preset")


if __name__ == '__main__':
    unittest.main()

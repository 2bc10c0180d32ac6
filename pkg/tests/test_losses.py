import unittest

import numpy as np
import numpy.testing as npt

from config.run_config import LossWeights
from losses import (
    LossTerms,
    consistency_loss,
    kd_loss,
    make_pseudo_labels,
    make_report,
    masked_cross_entropy,
    supervised_loss,
    total_loss,
)
from numerics import Tensor, fresh_tape
from utils.errors import DataError, ParameterError


def peaked_logits(labels, num_classes, margin=20.0):
    logits = np.zeros((labels.shape[0], num_classes) + labels.shape[1:])
    for c in range(num_classes):
        logits[:, c][labels == c] = margin
    return logits


class SupervisedLossTest(unittest.TestCase):

    def test_saturated_correct_prediction(self):
        labels = np.random.default_rng(0).integers(0, 4, size=(2, 3, 3))
        loss = supervised_loss(Tensor(peaked_logits(labels, 4)), labels)
        self.assertLess(loss.item(), 1e-6)

    def test_uniform_logits(self):
        labels = np.random.default_rng(1).integers(0, 21, size=(1, 4, 4))
        loss = supervised_loss(Tensor(np.zeros((1, 21, 4, 4))), labels)
        self.assertAlmostEqual(loss.item(), np.log(21), places=12)
        self.assertAlmostEqual(loss.item(), 3.0445, places=4)

    def test_matches_per_pixel_oracle(self):
        rng = np.random.default_rng(2)
        logits = rng.normal(size=(1, 3, 2, 2))
        labels = rng.integers(0, 3, size=(1, 2, 2))
        losses = []
        for i in range(2):
            for j in range(2):
                z = logits[0, :, i, j]
                losses.append(-(z[labels[0, i, j]] - np.log(np.sum(np.exp(z)))))
        self.assertAlmostEqual(supervised_loss(Tensor(logits), labels).item(), np.mean(losses), places=12)

    def test_ignored_pixels_do_not_count(self):
        rng = np.random.default_rng(3)
        logits = rng.normal(size=(1, 3, 2, 2))
        labels = np.array([[[0, 255], [2, 255]]])
        expected = supervised_loss(Tensor(logits[:, :, :, :1]), labels[:, :, :1]).item()
        self.assertAlmostEqual(supervised_loss(Tensor(logits), labels).item(), expected, places=12)

    def test_out_of_range_label(self):
        with self.assertRaises(DataError):
            supervised_loss(Tensor(np.zeros((1, 3, 2, 2))), np.array([[[0, 1], [3, 0]]]))


class PseudoLabelTest(unittest.TestCase):

    def test_zero_threshold_keeps_everything(self):
        pseudo = make_pseudo_labels(Tensor(np.random.default_rng(4).normal(size=(2, 3, 4, 4))), 0.0)
        self.assertTrue(pseudo.mask.all())
        self.assertEqual(pseudo.suppressed_fraction, 0.0)

    def test_threshold_above_one_masks_everything(self):
        logits = Tensor(np.random.default_rng(5).normal(size=(2, 3, 4, 4)), requires_grad=True)
        pseudo = make_pseudo_labels(logits, 1.0 + 1e-9)
        self.assertFalse(pseudo.mask.any())
        self.assertEqual(pseudo.suppressed_fraction, 1.0)
        with fresh_tape():
            loss = consistency_loss(logits, pseudo)
            self.assertEqual(loss.item(), 0.0)
            loss.backward()
        npt.assert_array_equal(logits.grad, np.zeros(logits.shape))

    def test_single_pixel_example(self):
        logits = np.array([2.0, 1.0, 1.0]).reshape(1, 3, 1, 1)
        pseudo = make_pseudo_labels(Tensor(logits), 0.5)
        self.assertEqual(pseudo.labels[0, 0, 0], 0)
        self.assertAlmostEqual(pseudo.confidence[0, 0, 0], np.e / (np.e + 2), places=12)
        self.assertAlmostEqual(pseudo.confidence[0, 0, 0], 0.576, places=3)
        self.assertTrue(pseudo.mask[0, 0, 0])

    def test_ties_pick_lowest_class(self):
        pseudo = make_pseudo_labels(Tensor(np.zeros((1, 4, 2, 2))), 0.0)
        npt.assert_array_equal(pseudo.labels, 0)

    def test_pseudo_labels_carry_no_gradient(self):
        peer = Tensor(np.random.default_rng(6).normal(size=(1, 3, 2, 2)), requires_grad=True)
        student = Tensor(np.random.default_rng(7).normal(size=(1, 3, 2, 2)), requires_grad=True)
        with fresh_tape():
            consistency_loss(student, make_pseudo_labels(peer, 0.0)).backward()
        self.assertIsNone(peer.grad)
        self.assertIsNotNone(student.grad)


class ConsistencyLossTest(unittest.TestCase):

    def test_agreement_is_near_zero(self):
        labels = np.random.default_rng(8).integers(0, 3, size=(2, 4, 4))
        peer = make_pseudo_labels(Tensor(peaked_logits(labels, 3)), 0.9)
        self.assertLess(consistency_loss(Tensor(peaked_logits(labels, 3)), peer).item(), 1e-6)

    def test_masked_out_pixels_have_no_effect(self):
        rng = np.random.default_rng(13)
        labels = rng.integers(0, 3, size=(2, 4, 4))
        peer_logits = peaked_logits(labels, 3)
        peer_logits[:, :, :2] = 0.0
        pseudo = make_pseudo_labels(Tensor(peer_logits), 0.9)
        self.assertTrue(pseudo.mask.any() and not pseudo.mask.all())

        logits = rng.normal(size=(2, 3, 4, 4))
        perturbed = logits.copy()
        perturbed[:, :, :2] += rng.normal(scale=5.0, size=perturbed[:, :, :2].shape)
        base = Tensor(logits, requires_grad=True)
        with fresh_tape():
            loss = consistency_loss(base, pseudo)
            loss.backward()
        self.assertEqual(consistency_loss(Tensor(perturbed), pseudo).item(), loss.item())
        npt.assert_array_equal(base.grad[:, :, :2], 0.0)

    def test_equals_supervised_loss_on_confident_pseudo_labels(self):
        rng = np.random.default_rng(14)
        peer = rng.normal(scale=3.0, size=(2, 4, 5, 5))
        pseudo = make_pseudo_labels(Tensor(peer), 0.6)
        self.assertTrue(pseudo.mask.any() and not pseudo.mask.all())
        logits = Tensor(rng.normal(size=(2, 4, 5, 5)))
        targets = np.where(pseudo.mask, pseudo.labels, 255)
        self.assertAlmostEqual(consistency_loss(logits, pseudo).item(), supervised_loss(logits, targets).item(), places=12)

    def test_empty_mask_is_exact_zero(self):
        loss = masked_cross_entropy(
            Tensor(np.ones((1, 2, 2, 2))), np.zeros((1, 2, 2), dtype=int), np.zeros((1, 2, 2), dtype=bool)
        )
        self.assertEqual(loss.item(), 0.0)
        self.assertFalse(np.signbit(loss.item()))


class DistillationTest(unittest.TestCase):

    def test_self_divergence_is_zero(self):
        z = Tensor(np.random.default_rng(9).normal(size=(2, 4, 3, 3)))
        for t in (1.0, 2.0, 5.0):
            self.assertAlmostEqual(kd_loss(z, z, t).item(), 0.0, delta=1e-9)

    def test_non_negative(self):
        rng = np.random.default_rng(12)
        for _ in range(1000):
            senior = Tensor(rng.normal(scale=3.0, size=(1, 4, 1, 2)))
            junior = Tensor(rng.normal(scale=3.0, size=(1, 4, 1, 2)))
            self.assertGreaterEqual(kd_loss(senior, junior, rng.uniform(0.5, 4.0)).item(), -1e-12)

    def test_two_class_closed_form(self):
        senior = Tensor(np.log([2.0, 1.0]).reshape(1, 2, 1, 1))
        junior = Tensor(np.zeros((1, 2, 1, 1)))
        expected = (2 / 3) * np.log(4 / 3) + (1 / 3) * np.log(2 / 3)
        self.assertAlmostEqual(kd_loss(senior, junior, 1.0).item(), expected, places=12)
        self.assertAlmostEqual(expected, 0.0566, places=4)

    def test_detached_senior_gets_no_gradient(self):
        rng = np.random.default_rng(10)
        senior = Tensor(rng.normal(size=(1, 3, 2, 2)), requires_grad=True)
        junior = Tensor(rng.normal(size=(1, 3, 2, 2)), requires_grad=True)
        with fresh_tape():
            kd_loss(senior, junior, 2.0).backward()
        self.assertIsNone(senior.grad)
        self.assertIsNotNone(junior.grad)

    def test_mask_restricts_average(self):
        rng = np.random.default_rng(11)
        senior = rng.normal(size=(1, 3, 1, 2))
        junior = rng.normal(size=(1, 3, 1, 2))
        mask = np.array([[[True, False]]])
        left = kd_loss(Tensor(senior[..., :1]), Tensor(junior[..., :1]), 2.0).item()
        self.assertAlmostEqual(kd_loss(Tensor(senior), Tensor(junior), 2.0, mask=mask).item(), left, places=12)

    def test_non_positive_temperature(self):
        z = Tensor(np.zeros((1, 2, 1, 1)))
        with self.assertRaises(ParameterError):
            kd_loss(z, z, 0.0)


class AggregateTest(unittest.TestCase):

    def test_direct_arithmetic(self):
        terms = LossTerms.from_values(sup_sr=2, sup_jr=4, con_sr=1, con_jr=3, kd=0.5)
        self.assertAlmostEqual(total_loss(terms, LossWeights()).item(), 5.5)

    def test_supervised_only(self):
        terms = LossTerms.from_values(sup_sr=2, sup_jr=4, con_sr=1, con_jr=3, kd=0.5)
        weights = LossWeights(lambda1=1.0, lambda2=0.0, lambda3=0.0)
        self.assertAlmostEqual(total_loss(terms, weights).item(), 3.0)

    def test_null_objective_has_zero_gradients(self):
        values = [Tensor(v, requires_grad=True) for v in (2.0, 4.0, 1.0, 3.0, 0.5)]
        with fresh_tape():
            total = total_loss(LossTerms(*values), LossWeights(lambda1=0.0, lambda2=0.0, lambda3=0.0))
            self.assertEqual(total.item(), 0.0)
            total.backward()
        for v in values:
            npt.assert_array_equal(v.grad, 0.0)

    def test_linear_in_each_weight(self):
        terms = LossTerms.from_values(sup_sr=0.7, sup_jr=1.3, con_sr=0.2, con_jr=0.4, kd=0.9)
        base = total_loss(terms, LossWeights(lambda1=1.0, lambda2=1.0, lambda3=1.0)).item()
        for field, increment in (("lambda1", 1.0), ("lambda2", 0.3), ("lambda3", 1.0)):
            bumped = LossWeights(**{"lambda1": 1.0, "lambda2": 1.0, "lambda3": 1.0, field: 1.0 + increment})
            delta = total_loss(terms, bumped).item() - base
            expected = {"lambda1": 0.5 * (0.7 + 1.3), "lambda2": 0.5 * (0.2 + 0.4), "lambda3": 0.9}[field]
            self.assertAlmostEqual(delta, increment * expected, places=12, msg=field)

    def test_ramped_weights_scale_unsupervised_terms(self):
        weights = LossWeights(lambda1=0.5, lambda2=2.0, lambda3=1.0).ramped(0.25)
        self.assertEqual((weights.lambda1, weights.lambda2, weights.lambda3), (0.5, 0.5, 0.25))

    def test_symmetric_under_branch_swap(self):
        terms = LossTerms.from_values(sup_sr=0.7, sup_jr=1.3, con_sr=0.2, con_jr=0.4, kd=0.9)
        weights = LossWeights(lambda1=0.5, lambda2=2.0, lambda3=1.0)
        self.assertAlmostEqual(total_loss(terms, weights).item(), total_loss(terms.swapped(), weights).item())

    def test_report_row(self):
        terms = LossTerms.from_values(sup_sr=2, sup_jr=4, con_sr=1, con_jr=3, kd=0.5)
        row = make_report(terms, LossWeights(), masked_fraction=0.25).as_row()
        self.assertEqual(list(row), ["sup_sr", "sup_jr", "con_sr", "con_jr", "kd", "total", "masked_fraction"])
        self.assertAlmostEqual(row["total"], 5.5)
        self.assertEqual(row["masked_fraction"], 0.25)


if __name__ == '__main__':
    unittest.main()

from msdarcy import identities, presets
from msdarcy.mixture import MixtureModel, PressureLaw, StateBox


def test_battery_passes_on_default_model():
    checks = identities.run_battery(
        presets.default_two_species_model(),
        presets.default_certificate_box(),
        count=300,
        seed=0,
    )
    assert all(c.passed for c in checks)
    names = [c.name for c in checks]
    assert "Gibbs-Duhem residual" in names
    assert "dissipation identity" in names
    assert "entropy flux compatibility (FD)" in names


def test_battery_deterministic():
    model = presets.default_two_species_model()
    box = presets.default_certificate_box()
    a = identities.run_battery(model, box, count=200, seed=5)
    b = identities.run_battery(model, box, count=200, seed=5)
    assert [(c.name, c.residual) for c in a] == [(c.name, c.residual) for c in b]


def test_mobility_check_reports_min_m_margin():
    # the sharper lower bound min_x x'Bx >= min M genuinely fails on the
    # default box at unequal densities; the battery reports the (negative)
    # margin without asserting it
    checks = identities.run_battery(
        presets.default_two_species_model(),
        presets.default_certificate_box(),
        count=1000,
        seed=0,
    )
    mob = next(c for c in checks if c.name.startswith("mobility"))
    assert mob.passed
    assert mob.min_m_margin < 0.0


def test_battery_catches_broken_friction_table():
    # lambda large enough to destroy quadratic-form positivity at skewed
    # densities: the mobility check must flag it
    laws = (PressureLaw(1.0, 2.0), PressureLaw(1.0, 2.0))
    model = MixtureModel.constant_lambda(laws, [1.0, 1.0], 14.0)
    box = StateBox([0.5, 0.5], [2.5, 2.5], [1.0, 1.0])
    checks = identities.run_battery(model, box, count=500, seed=0)
    mob = next(c for c in checks if c.name.startswith("mobility"))
    assert not mob.passed
    assert mob.residual > 0.0


def test_battery_gamma_one_species():
    laws = (PressureLaw(1.0, 1.0), PressureLaw(2.0, 2.0))
    model = MixtureModel.constant_lambda(laws, [1.0, 1.0], 0.5)
    box = StateBox([0.5, 0.5], [2.0, 2.0], [1.0, 1.0])
    checks = identities.run_battery(model, box, count=300, seed=1)
    assert all(c.passed for c in checks)


def test_single_species_battery():
    model = MixtureModel.constant_lambda([PressureLaw(1.0, 2.0)], [1.0], 0.0)
    box = StateBox([0.5], [2.0], [1.0])
    checks = identities.run_battery(model, box, count=300, seed=2)
    assert all(c.passed for c in checks)

#include "masmodal/elements.hpp"

#include <cmath>
#include <stdexcept>

namespace masmodal {

namespace {

// Gauss-Legendre points/weights on [0, 1].
void gauss_rule(int n, std::vector<double>* x, std::vector<double>* w) {
    switch (n) {
        case 2:
            *x = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
            *w = {0.5, 0.5};
            return;
        case 3: {
            const double a = 0.5 * std::sqrt(3.0 / 5.0);
            *x = {0.5 - a, 0.5, 0.5 + a};
            *w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
            return;
        }
        case 4: {
            const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double wa = (18.0 + std::sqrt(30.0)) / 72.0;
            const double wb = (18.0 - std::sqrt(30.0)) / 72.0;
            *x = {0.5 - 0.5 * b, 0.5 - 0.5 * a, 0.5 + 0.5 * a, 0.5 + 0.5 * b};
            *w = {wb, wa, wa, wb};
            return;
        }
        case 5: {
            const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 1800.0;
            const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 1800.0;
            *x = {0.5 - 0.5 * b, 0.5 - 0.5 * a, 0.5, 0.5 + 0.5 * a, 0.5 + 0.5 * b};
            *w = {wb, wa, 64.0 / 225.0, wa, wb};
            return;
        }
        default:
            throw std::runtime_error("unsupported gauss rule");
    }
}

double cowper_shear_factor(double nu) { return 10.0 * (1.0 + nu) / (12.0 + 11.0 * nu); }

} // namespace

// ---------------------------------------------------------------- BeamKernel

BeamKernel::BeamKernel(const Model& model, const Element& e) {
    mat_ = &model.material(e.material);
    sec_ = &model.fiber_section(e.section);
    masonry_ = mat_->model == MaterialModel::Masonry;
    const Node& a = model.nodes[e.nodes[0]];
    const Node& b = model.nodes[e.nodes[1]];
    length_ = std::hypot(b.x - a.x, b.y - a.y);
    cos_ = (b.x - a.x) / length_;
    sin_ = (b.y - a.y) / length_;

    young_ = mat_->young;
    rho_ = mat_->density;
    shear_mod_ = young_ / (2.0 * (1.0 + mat_->poisson));
    ks_ = sec_->shear_factor > 0.0 ? sec_->shear_factor : cowper_shear_factor(mat_->poisson);

    const int nf = sec_->fibers;
    const double h = sec_->height, bw = sec_->width;
    const double t = h / nf;
    fiber_y_.resize(nf);
    fiber_a_.resize(nf);
    fiber_i_.resize(nf);
    area_ = 0.0;
    inertia_ = 0.0;
    for (int k = 0; k < nf; ++k) {
        fiber_y_[k] = -0.5 * h + (k + 0.5) * t;
        fiber_a_[k] = bw * t;
        fiber_i_[k] = bw * t * t * t / 12.0; // layer's own second moment
        area_ += fiber_a_[k];
        inertia_ += fiber_a_[k] * fiber_y_[k] * fiber_y_[k] + fiber_i_[k];
    }

    phi_ = 12.0 * young_ * inertia_ / (ks_ * shear_mod_ * area_ * length_ * length_);
    mu_shape_ = 1.0 / (1.0 + phi_);

    std::vector<double> gx, gw;
    gauss_rule(sec_->gauss_points, &gx, &gw);
    gauss_x_.resize(gx.size());
    gauss_w_.resize(gx.size());
    for (size_t i = 0; i < gx.size(); ++i) {
        gauss_x_[i] = gx[i] * length_;
        gauss_w_[i] = gw[i] * length_;
    }
}

Eigen::Matrix<double, 6, 1> BeamKernel::to_local(const Eigen::Matrix<double, 6, 1>& ug) const {
    Eigen::Matrix<double, 6, 1> ul;
    ul[0] = cos_ * ug[0] + sin_ * ug[1];
    ul[1] = -sin_ * ug[0] + cos_ * ug[1];
    ul[2] = ug[2];
    ul[3] = cos_ * ug[3] + sin_ * ug[4];
    ul[4] = -sin_ * ug[3] + cos_ * ug[4];
    ul[5] = ug[5];
    return ul;
}

void BeamKernel::shape_b(double x, Eigen::Matrix<double, 6, 1>* bu,
                         Eigen::Matrix<double, 6, 1>* bb,
                         Eigen::Matrix<double, 6, 1>* bs) const {
    const double L = length_, mu = mu_shape_;
    bu->setZero();
    (*bu)[0] = -1.0 / L;
    (*bu)[3] = 1.0 / L;

    // curvature kappa(x) = psi'(x) of the interdependent interpolation
    bb->setZero();
    (*bb)[1] = -6.0 * mu / (L * L) + 12.0 * mu * x / (L * L * L);
    (*bb)[2] = -(1.0 + 3.0 * mu) / L + 6.0 * mu * x / (L * L);
    (*bb)[4] = 6.0 * mu / (L * L) - 12.0 * mu * x / (L * L * L);
    (*bb)[5] = (1.0 - 3.0 * mu) / L + 6.0 * mu * x / (L * L);

    // constant transverse shear strain gamma = v' - psi
    bs->setZero();
    (*bs)[1] = -phi_ * mu / L;
    (*bs)[2] = -phi_ * mu / 2.0;
    (*bs)[4] = phi_ * mu / L;
    (*bs)[5] = -phi_ * mu / 2.0;
}

void BeamKernel::shape_n(double x, Eigen::Matrix<double, 6, 1>* nu,
                         Eigen::Matrix<double, 6, 1>* nv) const {
    const double L = length_, mu = mu_shape_, phi = phi_;
    const double s = x / L;
    nu->setZero();
    (*nu)[0] = 1.0 - s;
    (*nu)[3] = s;

    nv->setZero();
    (*nv)[1] = 1.0 - phi * mu * s - 3.0 * mu * s * s + 2.0 * mu * s * s * s;
    (*nv)[2] = L * (s - 0.5 * phi * mu * s - 0.5 * (1.0 + 3.0 * mu) * s * s + mu * s * s * s);
    (*nv)[4] = phi * mu * s + 3.0 * mu * s * s - 2.0 * mu * s * s * s;
    (*nv)[5] = L * (-0.5 * phi * mu * s + 0.5 * (1.0 - 3.0 * mu) * s * s + mu * s * s * s);
}

Eigen::Matrix<double, 6, 6> BeamKernel::elastic_stiffness() const {
    // the zero-displacement tangent: every fiber on the elastic branch, so
    // the elastic matrix and the tangent assembly agree bit-for-bit
    Eigen::Matrix<double, 6, 6> k;
    response(Eigen::Matrix<double, 6, 1>::Zero(), &k, nullptr, nullptr);
    return k;
}

Eigen::Matrix<double, 6, 6> BeamKernel::mass() const {
    Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
    std::vector<double> gx, gw;
    gauss_rule(4, &gx, &gw); // degree-6 integrands
    Eigen::Matrix<double, 6, 1> nu, nv;
    for (size_t g = 0; g < gx.size(); ++g) {
        shape_n(gx[g] * length_, &nu, &nv);
        const double w = gw[g] * length_ * rho_ * area_;
        m += w * (nu * nu.transpose() + nv * nv.transpose());
    }
    const double c = cos_, s = sin_;
    Eigen::Matrix<double, 6, 6> t = Eigen::Matrix<double, 6, 6>::Zero();
    t(0, 0) = c; t(0, 1) = s; t(1, 0) = -s; t(1, 1) = c; t(2, 2) = 1.0;
    t(3, 3) = c; t(3, 4) = s; t(4, 3) = -s; t(4, 4) = c; t(5, 5) = 1.0;
    return t.transpose() * m * t;
}

Eigen::Matrix<double, 6, 1> BeamKernel::line_load(double qx, double qy) const {
    const double ql = cos_ * qx + sin_ * qy;  // axial component
    const double qt = -sin_ * qx + cos_ * qy; // transverse component
    Eigen::Matrix<double, 6, 1> f = Eigen::Matrix<double, 6, 1>::Zero();
    std::vector<double> gx, gw;
    gauss_rule(4, &gx, &gw);
    Eigen::Matrix<double, 6, 1> nu, nv;
    for (size_t g = 0; g < gx.size(); ++g) {
        shape_n(gx[g] * length_, &nu, &nv);
        f += gw[g] * length_ * (ql * nu + qt * nv);
    }
    Eigen::Matrix<double, 6, 1> fg;
    fg[0] = cos_ * f[0] - sin_ * f[1];
    fg[1] = sin_ * f[0] + cos_ * f[1];
    fg[2] = f[2];
    fg[3] = cos_ * f[3] - sin_ * f[4];
    fg[4] = sin_ * f[3] + cos_ * f[4];
    fg[5] = f[5];
    return fg;
}

Eigen::Matrix<double, 6, 1> BeamKernel::self_weight(double gravity) const {
    return line_load(0.0, -rho_ * area_ * gravity);
}

void BeamKernel::response(const Eigen::Matrix<double, 6, 1>& u_global,
                          Eigen::Matrix<double, 6, 6>* k_tangent,
                          Eigen::Matrix<double, 6, 1>* f_internal,
                          std::vector<BeamSectionState>* records) const {
    const Eigen::Matrix<double, 6, 1> u = to_local(u_global);
    Eigen::Matrix<double, 6, 6> k = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> f = Eigen::Matrix<double, 6, 1>::Zero();
    const MaterialParams mp = mat_->params();
    Eigen::Matrix<double, 6, 1> bu, bb, bs;
    if (records) records->clear();

    for (int g = 0; g < gauss_count(); ++g) {
        shape_b(gauss_x_[g], &bu, &bb, &bs);
        const double eps0 = bu.dot(u);
        const double kap = bb.dot(u);
        const double gam = bs.dot(u);

        double n_force = 0.0, moment = 0.0;
        double d00 = 0.0, d01 = 0.0, d11 = 0.0;
        double area_c = 0.0, area_f = 0.0;
        BeamSectionState rec;
        if (records) {
            rec.x = gauss_x_[g];
            rec.axial_strain = eps0;
            rec.curvature = kap;
            rec.shear_strain = gam;
            rec.fiber_strain.resize(fiber_y_.size());
            rec.fiber_stress.resize(fiber_y_.size());
            rec.fiber_cracked.resize(fiber_y_.size());
        }
        for (size_t kf = 0; kf < fiber_y_.size(); ++kf) {
            const double y = fiber_y_[kf];
            const double a = fiber_a_[kf];
            const double eps = eps0 - y * kap;
            double sig, et;
            bool cracked;
            if (masonry_) {
                const UniaxialResponse r = uniaxial_respond(eps, mp);
                sig = r.stress;
                et = r.tangent;
                cracked = r.cracked;
            } else {
                sig = young_ * eps;
                et = young_;
                cracked = false;
            }
            n_force += sig * a;
            moment += -y * sig * a + et * kap * fiber_i_[kf];
            d00 += et * a;
            d01 += -y * et * a;
            d11 += et * (y * y * a + fiber_i_[kf]);
            if (cracked) area_f += a; else area_c += a;
            if (records) {
                rec.fiber_strain[kf] = eps;
                rec.fiber_stress[kf] = sig;
                rec.fiber_cracked[kf] = cracked ? 1 : 0;
            }
        }
        const double gas = ks_ * shear_mod_ * area_c;
        const double v_force = gas * gam;
        const double w = gauss_w_[g];
        f += w * (bu * n_force + bb * moment + bs * v_force);
        k += w * (d00 * bu * bu.transpose() + d01 * (bu * bb.transpose() + bb * bu.transpose()) +
                  d11 * bb * bb.transpose() + gas * bs * bs.transpose());
        if (records) {
            rec.axial_force = n_force;
            rec.moment = moment;
            rec.shear_force = v_force;
            rec.cracked_ratio = area_f / area_;
            records->push_back(std::move(rec));
        }
    }

    const double c = cos_, s = sin_;
    Eigen::Matrix<double, 6, 6> t = Eigen::Matrix<double, 6, 6>::Zero();
    t(0, 0) = c; t(0, 1) = s; t(1, 0) = -s; t(1, 1) = c; t(2, 2) = 1.0;
    t(3, 3) = c; t(3, 4) = s; t(4, 3) = -s; t(4, 4) = c; t(5, 5) = 1.0;
    if (k_tangent) *k_tangent = t.transpose() * k * t;
    if (f_internal) *f_internal = t.transpose() * f;
}

// ---------------------------------------------------------------- QuadKernel

QuadKernel::QuadKernel(const Model& model, const Element& e) {
    mat_ = &model.material(e.material);
    masonry_ = mat_->model == MaterialModel::Masonry;
    thickness_ = model.solid_section(e.section).thickness;
    rho_ = mat_->density;

    const double g = 1.0 / std::sqrt(3.0);
    const double pts[4][2] = {{-g, -g}, {g, -g}, {g, g}, {-g, g}};
    const double xs[4] = {model.nodes[e.nodes[0]].x, model.nodes[e.nodes[1]].x,
                          model.nodes[e.nodes[2]].x, model.nodes[e.nodes[3]].x};
    const double ys[4] = {model.nodes[e.nodes[0]].y, model.nodes[e.nodes[1]].y,
                          model.nodes[e.nodes[2]].y, model.nodes[e.nodes[3]].y};
    const double xi_i[4] = {-1, 1, 1, -1};
    const double eta_i[4] = {-1, -1, 1, 1};

    for (int p = 0; p < 4; ++p) {
        const double xi = pts[p][0], eta = pts[p][1];
        double dndxi[4], dndeta[4], n[4];
        for (int i = 0; i < 4; ++i) {
            n[i] = 0.25 * (1 + xi * xi_i[i]) * (1 + eta * eta_i[i]);
            dndxi[i] = 0.25 * xi_i[i] * (1 + eta * eta_i[i]);
            dndeta[i] = 0.25 * eta_i[i] * (1 + xi * xi_i[i]);
        }
        double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
        for (int i = 0; i < 4; ++i) {
            j11 += dndxi[i] * xs[i];
            j12 += dndxi[i] * ys[i];
            j21 += dndeta[i] * xs[i];
            j22 += dndeta[i] * ys[i];
        }
        const double det = j11 * j22 - j12 * j21;
        if (!(det > 0.0)) throw std::runtime_error("quad element: negative Jacobian");
        GaussData& gd = gauss_[p];
        gd.weight = det; // unit gauss weights for 2x2
        gd.b.setZero();
        gd.shape.setZero();
        gd.x = gd.y = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double dndx = (j22 * dndxi[i] - j12 * dndeta[i]) / det;
            const double dndy = (-j21 * dndxi[i] + j11 * dndeta[i]) / det;
            gd.b(0, 2 * i) = dndx;
            gd.b(1, 2 * i + 1) = dndy;
            gd.b(2, 2 * i) = dndy;
            gd.b(2, 2 * i + 1) = dndx;
            gd.shape(0, i) = n[i];
            gd.x += n[i] * xs[i];
            gd.y += n[i] * ys[i];
        }
    }
}

Eigen::Matrix3d QuadKernel::elastic_d() const {
    if (masonry_) {
        // condensed elastic tangent of the 3D law, so the zero-load tangent
        // assembly reproduces the elastic matrix bit-for-bit
        return plane_stress_respond(Eigen::Vector3d::Zero(), mat_->params()).tangent;
    }
    const double e = mat_->young, nu = mat_->poisson;
    Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
    const double f = e / (1.0 - nu * nu);
    d(0, 0) = d(1, 1) = f;
    d(0, 1) = d(1, 0) = f * nu;
    d(2, 2) = 0.5 * f * (1.0 - nu);
    return d;
}

Eigen::Matrix<double, 8, 8> QuadKernel::elastic_stiffness() const {
    const Eigen::Matrix3d d = elastic_d();
    Eigen::Matrix<double, 8, 8> k = Eigen::Matrix<double, 8, 8>::Zero();
    for (const auto& gd : gauss_)
        k += thickness_ * gd.weight * gd.b.transpose() * d * gd.b;
    return k;
}

Eigen::Matrix<double, 8, 8> QuadKernel::mass() const {
    Eigen::Matrix<double, 8, 8> m = Eigen::Matrix<double, 8, 8>::Zero();
    for (const auto& gd : gauss_) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double v = rho_ * thickness_ * gd.weight * gd.shape(0, i) * gd.shape(0, j);
                m(2 * i, 2 * j) += v;
                m(2 * i + 1, 2 * j + 1) += v;
            }
    }
    return m;
}

Eigen::Matrix<double, 8, 1> QuadKernel::self_weight(double gravity) const {
    Eigen::Matrix<double, 8, 1> f = Eigen::Matrix<double, 8, 1>::Zero();
    for (const auto& gd : gauss_)
        for (int i = 0; i < 4; ++i)
            f[2 * i + 1] -= rho_ * thickness_ * gravity * gd.weight * gd.shape(0, i);
    return f;
}

void QuadKernel::response(const Eigen::Matrix<double, 8, 1>& u,
                          Eigen::Matrix<double, 8, 8>* k_tangent,
                          Eigen::Matrix<double, 8, 1>* f_internal,
                          std::vector<QuadPointState>* records) const {
    Eigen::Matrix<double, 8, 8> k = Eigen::Matrix<double, 8, 8>::Zero();
    Eigen::Matrix<double, 8, 1> f = Eigen::Matrix<double, 8, 1>::Zero();
    const MaterialParams mp = mat_->params();
    const Eigen::Matrix3d de = elastic_d();
    if (records) records->clear();

    for (const auto& gd : gauss_) {
        const Eigen::Vector3d eps = gd.b * u;
        Eigen::Vector3d sig;
        Eigen::Matrix3d dt;
        if (masonry_) {
            const PlaneStressResponse r = plane_stress_respond(eps, mp);
            sig = r.stress;
            dt = r.tangent;
            if (records) {
                QuadPointState ps;
                ps.x = gd.x;
                ps.y = gd.y;
                ps.strain = SymTensor3::from_components(eps[0], eps[1], r.e33,
                                                        0.5 * eps[2], 0.0, 0.0);
                ps.stress = SymTensor3::from_components(sig[0], sig[1], 0.0, sig[2], 0.0, 0.0);
                ps.fracture = SymTensor3::from_components(r.fracture[0], r.fracture[1],
                                                          r.fracture_33, r.fracture[2], 0.0, 0.0);
                ps.region = r.region;
                records->push_back(ps);
            }
        } else {
            sig = de * eps;
            dt = de;
            if (records) {
                QuadPointState ps;
                ps.x = gd.x;
                ps.y = gd.y;
                ps.strain = SymTensor3::from_components(eps[0], eps[1], 0.0, 0.5 * eps[2], 0.0, 0.0);
                ps.stress = SymTensor3::from_components(sig[0], sig[1], 0.0, sig[2], 0.0, 0.0);
                ps.region = RegionTag{Region::V3, false};
                records->push_back(ps);
            }
        }
        f += thickness_ * gd.weight * gd.b.transpose() * sig;
        k += thickness_ * gd.weight * gd.b.transpose() * dt * gd.b;
    }
    if (k_tangent) *k_tangent = k;
    if (f_internal) *f_internal = f;
}

// --------------------------------------------------------------- TrussKernel

TrussKernel::TrussKernel(const Model& model, const Element& e) {
    mat_ = &model.material(e.material);
    masonry_ = mat_->model == MaterialModel::Masonry;
    area_ = model.bar_section(e.section).area;
    rho_ = mat_->density;
    young_ = mat_->young;
    const Node& a = model.nodes[e.nodes[0]];
    const Node& b = model.nodes[e.nodes[1]];
    length_ = std::hypot(b.x - a.x, b.y - a.y);
    const double c = (b.x - a.x) / length_;
    const double s = (b.y - a.y) / length_;
    dir_ << -c, -s, c, s;
}

Eigen::Matrix<double, 4, 4> TrussKernel::elastic_stiffness() const {
    Eigen::Matrix<double, 4, 4> k;
    response(Eigen::Matrix<double, 4, 1>::Zero(), &k, nullptr, nullptr);
    return k;
}

Eigen::Matrix<double, 4, 4> TrussKernel::mass() const {
    Eigen::Matrix<double, 4, 4> m = Eigen::Matrix<double, 4, 4>::Zero();
    const double half = 0.5 * rho_ * area_ * length_;
    m.diagonal().setConstant(half);
    return m;
}

Eigen::Matrix<double, 4, 1> TrussKernel::self_weight(double gravity) const {
    Eigen::Matrix<double, 4, 1> f = Eigen::Matrix<double, 4, 1>::Zero();
    const double half = 0.5 * rho_ * area_ * length_ * gravity;
    f[1] = -half;
    f[3] = -half;
    return f;
}

void TrussKernel::response(const Eigen::Matrix<double, 4, 1>& u,
                           Eigen::Matrix<double, 4, 4>* k_tangent,
                           Eigen::Matrix<double, 4, 1>* f_internal,
                           TrussState* record) const {
    const double eps = dir_.dot(u) / length_;
    double sig, et;
    bool cracked = false;
    if (masonry_) {
        const UniaxialResponse r = uniaxial_respond(eps, mat_->params());
        sig = r.stress;
        et = r.tangent;
        cracked = r.cracked;
    } else {
        sig = young_ * eps;
        et = young_;
    }
    if (k_tangent) *k_tangent = (et * area_ / length_) * dir_ * dir_.transpose();
    if (f_internal) *f_internal = (sig * area_) * dir_;
    if (record) {
        record->strain = eps;
        record->stress = sig;
        record->cracked = cracked;
    }
}

std::vector<int> element_dofs(const Model& model, const Element& e) {
    std::vector<int> dofs;
    if (e.type == ElementType::Beam) {
        dofs = {model.dofs.at(e.nodes[0], Dof::Ux), model.dofs.at(e.nodes[0], Dof::Uy),
                model.dofs.at(e.nodes[0], Dof::Rz), model.dofs.at(e.nodes[1], Dof::Ux),
                model.dofs.at(e.nodes[1], Dof::Uy), model.dofs.at(e.nodes[1], Dof::Rz)};
    } else if (e.type == ElementType::Quad) {
        dofs.reserve(8);
        for (int i = 0; i < 4; ++i) {
            dofs.push_back(model.dofs.at(e.nodes[i], Dof::Ux));
            dofs.push_back(model.dofs.at(e.nodes[i], Dof::Uy));
        }
    } else {
        dofs = {model.dofs.at(e.nodes[0], Dof::Ux), model.dofs.at(e.nodes[0], Dof::Uy),
                model.dofs.at(e.nodes[1], Dof::Ux), model.dofs.at(e.nodes[1], Dof::Uy)};
    }
    return dofs;
}

} // namespace masmodal

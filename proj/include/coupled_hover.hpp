#pragma once

#include "coupled_hover/certificate.hpp"
#include "coupled_hover/config.hpp"
#include "coupled_hover/controller.hpp"
#include "coupled_hover/dynamics.hpp"
#include "coupled_hover/error.hpp"
#include "coupled_hover/gains.hpp"
#include "coupled_hover/lyapunov.hpp"
#include "coupled_hover/platform.hpp"
#include "coupled_hover/serialization.hpp"
#include "coupled_hover/so3.hpp"
#include "coupled_hover/verification.hpp"

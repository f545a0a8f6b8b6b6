#ifndef ANTCAL_ANTCAL_HPP
#define ANTCAL_ANTCAL_HPP

#include "antcal/error.hpp"
#include "antcal/geometry.hpp"
#include "antcal/maxima.hpp"
#include "antcal/regress.hpp"
#include "antcal/signalio.hpp"
#include "antcal/simulate.hpp"
#include "antcal/time.hpp"
#include "antcal/tracktab.hpp"

#endif  // ANTCAL_ANTCAL_HPP

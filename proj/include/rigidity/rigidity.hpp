#ifndef RIGIDITY_RIGIDITY_HPP
#define RIGIDITY_RIGIDITY_HPP

#include "rigidity/linalg.hpp"
#include "rigidity/framework.hpp"
#include "rigidity/flex.hpp"
#include "rigidity/path.hpp"
#include "rigidity/order.hpp"
#include "rigidity/fixtures.hpp"
#include "rigidity/cusp.hpp"
#include "rigidity/io.hpp"

#endif  // RIGIDITY_RIGIDITY_HPP

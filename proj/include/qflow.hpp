#ifndef QFLOW_HPP
#define QFLOW_HPP

#include <qflow/audits.hpp>
#include <qflow/body_io.hpp>
#include <qflow/commands.hpp>
#include <qflow/config.hpp>
#include <qflow/convex_body.hpp>
#include <qflow/curvature_algebra.hpp>
#include <qflow/diagnostics.hpp>
#include <qflow/errors.hpp>
#include <qflow/flow.hpp>
#include <qflow/minimax.hpp>
#include <qflow/run.hpp>
#include <qflow/support_field.hpp>
#include <qflow/svg.hpp>
#include <qflow/verify.hpp>

#endif

#pragma once

namespace faqtor {
class AbstractionSet;
}

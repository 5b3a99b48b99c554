#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace twostage {

/// Number of workers to use when the caller asks for 0 ("auto").
inline std::size_t resolve_workers(std::size_t requested) {
	if (requested > 0) {
		return requested;
	}
	return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Tasks are claimed
/// in index order; callers write results into slot i so the outcome does
/// not depend on completion order. The first exception (lowest index) is
/// rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
	workers = std::min(resolve_workers(workers), std::max<std::size_t>(n, 1));
	if (workers <= 1) {
		for (std::size_t i = 0; i < n; ++i) {
			fn(i);
		}
		return;
	}
	std::atomic<std::size_t> next{0};
	std::atomic<bool> failed{false};
	std::mutex error_mutex;
	std::size_t error_index = n;
	std::exception_ptr error;
	auto worker = [&] {
		while (!failed.load()) {
			const std::size_t i = next.fetch_add(1);
			if (i >= n) {
				return;
			}
			try {
				fn(i);
			} catch (...) {
				std::lock_guard lock(error_mutex);
				if (i < error_index) {
					error_index = i;
					error = std::current_exception();
				}
				failed.store(true);
			}
		}
	};
	std::vector<std::jthread> pool;
	pool.reserve(workers);
	for (std::size_t w = 0; w < workers; ++w) {
		pool.emplace_back(worker);
	}
	pool.clear();
	if (error) {
		std::rethrow_exception(error);
	}
}

} // namespace twostage
